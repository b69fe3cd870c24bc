import numpy as np
import pytest

from heisenmod import ModuleParams, hermite_vector

# parameter sets exercised throughout: commutative-fiber, half-integer-flavored,
# and a genuinely matrix-valued module
PARAM_SETS = [
    ModuleParams(0, 1, 1, 1.0 / np.sqrt(2.0)),
    ModuleParams(1, 2, 2, 1.0 / 3.0 + 1.0 / np.sqrt(2.0)),
    ModuleParams(1, 3, 6, 0.7),
]


@pytest.fixture(params=PARAM_SETS, ids=["scalar", "d2", "d6"])
def params(request):
    return request.param


def random_hermite_combo(rng, params, max_order=3, n_terms=2):
    """Random finite combination of Hermite vectors across components."""
    vec = None
    for _ in range(n_terms):
        j = int(rng.integers(0, max_order + 1))
        comp = int(rng.integers(0, params.d))
        c = complex(rng.standard_normal(), rng.standard_normal())
        term = hermite_vector(abs(params.eth), j, dim=params.d,
                              component=comp).scale(c)
        vec = term if vec is None else vec + term
    return vec


def inner_box(params):
    # lattice decay of inner-product coefficients slows as |eth| shrinks
    return 20 if abs(params.eth) < 0.5 else 12


def random_torus_element(rng, theta, radius=2, n_coeffs=4):
    from heisenmod import TorusElement
    coeffs = {}
    for _ in range(n_coeffs):
        g = (int(rng.integers(-radius, radius + 1)),
             int(rng.integers(-radius, radius + 1)))
        coeffs[g] = complex(rng.standard_normal(), rng.standard_normal())
    return TorusElement(theta, coeffs)
