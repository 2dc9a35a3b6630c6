"""Published reference values used by ``--check`` and the tests.

Stored as literals so that checks compare against an independent copy
rather than against the code that produced them.
"""

import numpy as np

# Integer cloning map with F = diag(1, -1), interleaved (q, p) order.
CLONE_MAP = np.array([
    [1, 0, 1, 1, -1, 1],
    [0, 1, 1, 2, 0, 1],
    [1, 0, 0, 1, 0, 1],
    [0, 1, -1, -1, 1, 0],
    [1, 0, 1, 2, -1, 2],
    [0, -1, 0, -1, -1, -1],
], dtype=np.int64)

# Generator tables, rounded to three decimals.  X acts second, Y first:
# CLONE_MAP = exp(X) exp(Y).
SHEAR_GENERATOR = np.array([
    [-0.209, -0.003, -0.206, -0.332, 0.206, -0.128],
    [0.418, 0.209, -0.120, -0.120, -0.006, 0.006],
    [0.120, -0.332, -0.738, -0.254, 0.284, -0.583],
    [-0.120, 0.206, 1.066, 0.738, -0.535, 0.738],
    [-0.006, -0.128, -0.738, -0.583, 0.409, -0.505],
    [-0.006, -0.206, -0.535, -0.284, 0.254, -0.409],
])

ROTATION_GENERATOR = np.array([
    [0.779, -0.203, -0.796, 0.834, 0.117, 0.329],
    [0.101, -0.779, -1.438, -0.412, 1.107, -1.741],
    [0.412, 0.834, -2.509, -0.722, 2.479, 0.563],
    [-1.438, 0.796, 4.039, 2.509, -1.512, 3.013],
    [1.741, 0.329, -3.013, 0.563, 1.534, 0.958],
    [1.107, -0.117, -1.512, -2.479, -0.774, -1.534],
])

GENERATOR_TABLE_TOL = 2e-3

# Configuration-space map that clones positions, and its inverse.
CONFIG_MAP = np.array([[1, -1, -1], [1, 0, 1], [1, -1, 0]], dtype=np.int64)
CONFIG_MAP_INVERSE = np.array([[1, 1, -1], [1, 1, -2], [-1, 0, 1]], dtype=np.int64)

# Histogram statistics quoted for the machine-noise-only experiment
# (beta = 730, source mean q = 5, p = 8).  Quoted as (p-spread, q-spread).
FIG2_CAPTION = {
    "source": {"std": (0.037, 0.052), "rho": 0.708},
    "target": {"std": (0.037, 0.037), "rho": 0.0},
    "machine": {"std": (0.052, 0.083), "rho": -0.32},
}
