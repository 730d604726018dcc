"""Pure-numpy stencil kernels (fallback for the compiled ``_ckernels``).

Boundary conditions are passed as two length-4 arrays ordered
(left, right, bottom, top): ``kinds`` with 0 = Neumann, 1 = Dirichlet,
2 = periodic, and ``values`` holding the Dirichlet data.
"""

import numpy as np

NEUMANN, DIRICHLET, PERIODIC = 0, 1, 2


def pad(f, kinds, values):
    """Return ``f`` with one ghost layer per side (corners left at zero)."""
    nx, ny = f.shape
    g = np.zeros((nx + 2, ny + 2))
    g[1:-1, 1:-1] = f
    for side, (dst, src, wrap) in enumerate((
        ((0, slice(1, -1)), (0, slice(None)), (-1, slice(None))),
        ((-1, slice(1, -1)), (-1, slice(None)), (0, slice(None))),
        ((slice(1, -1), 0), (slice(None), 0), (slice(None), -1)),
        ((slice(1, -1), -1), (slice(None), -1), (slice(None), 0)),
    )):
        k = kinds[side]
        if k == PERIODIC:
            g[dst] = f[wrap]
        elif k == DIRICHLET:
            g[dst] = 2.0 * values[side] - f[src]
        else:
            g[dst] = f[src]
    return g


def gradient(f, hx, hy, kinds, values):
    g = pad(f, kinds, values)
    gx = (g[1:, 1:-1] - g[:-1, 1:-1]) / hx
    gy = (g[1:-1, 1:] - g[1:-1, :-1]) / hy
    return gx, gy


def divergence(u, v, hx, hy):
    return (u[1:, :] - u[:-1, :]) / hx + (v[:, 1:] - v[:, :-1]) / hy


def laplacian(f, hx, hy, kinds, values):
    gx, gy = gradient(f, hx, hy, kinds, values)
    return divergence(gx, gy, hx, hy)


def face_average(f, kinds, values):
    g = pad(f, kinds, values)
    ax = 0.5 * (g[1:, 1:-1] + g[:-1, 1:-1])
    ay = 0.5 * (g[1:-1, 1:] + g[1:-1, :-1])
    return ax, ay


def advect(u, v, f, hx, hy, kinds, values):
    ax, ay = face_average(f, kinds, values)
    return divergence(u * ax, v * ay, hx, hy)
