"""Linear symplectic cloning maps, their Hamiltonians, thermal noise,
manifold and optical variants."""

__version__ = "0.1.0"

from .symplectic import (  # noqa: E402
    TIME_REVERSAL,
    CloningChoices,
    DegenerateStepError,
    LinearMap,
    build_cloning_map,
    clone_variant,
    is_antisymplectic,
    is_generator,
    is_symplectic,
    random_symplectic,
    standard_form,
    symplectic_gram_schmidt,
    verify_cloning,
)
from .matfuncs import mat_exp, principal_log  # noqa: E402
from .hamiltonian import (  # noqa: E402
    HamiltonianFactors,
    has_real_log,
    spectral_split,
    symplectic_polar,
    two_stage_clone,
)
