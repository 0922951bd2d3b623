"""Pure NumPy transfer-matrix kernels.

Same contract as the compiled extension ``_core``:

* ``const_transfers(a, coef)``   -> exp(coef[k] * a) for every k
* ``schrodinger_core(v0, steps, zs)`` -> M0(-s) @ Mz(s) for every (z, s)

where ``Mz(s)`` is the transfer matrix of (y', y) for -y'' + v0 y = z y
over a signed step s, and ``M0 = M_{z=0}``.
"""

import numpy as np

BACKEND = "python"

_TAYLOR_TERMS = 18
_SINC_CUT = 1e-3


def const_transfers(a, coef):
    """Matrix exponentials exp(c * a) for a batch of complex scalars c.

    Parameters
    ----------
    a : ndarray, shape (m, m)
        Fixed complex matrix.
    coef : ndarray, shape (k,)
        Complex coefficients.

    Returns
    -------
    ndarray, shape (k, m, m)
    """
    a = np.asarray(a, dtype=complex)
    coef = np.asarray(coef, dtype=complex).ravel()
    m = a.shape[0]
    if coef.size == 0:
        return np.empty((0, m, m), dtype=complex)
    # Eigendecomposition fast path; defective generators (nilpotent J*H
    # blocks) fall back to scaled Taylor evaluation.
    lam, vec = np.linalg.eig(a)
    use_eig = False
    if np.all(np.isfinite(vec)):
        try:
            vinv = np.linalg.inv(vec)
            cond = np.linalg.norm(vec, 2) * np.linalg.norm(vinv, 2)
            resid = np.linalg.norm(vec @ np.diag(lam) @ vinv - a, 2)
            scale = max(np.linalg.norm(a, 2), 1e-300)
            use_eig = cond < 1e7 and resid < 1e-13 * cond * scale
        except np.linalg.LinAlgError:
            use_eig = False
    if use_eig:
        phases = np.exp(np.outer(coef, lam))
        return np.einsum("ij,kj,jl->kil", vec, phases, vinv, optimize=True)
    return _expm_taylor_batched(coef[:, None, None] * a)


def _expm_taylor_batched(mats):
    """Scaling-and-squaring Taylor exponential of a stack of matrices."""
    mats = np.asarray(mats, dtype=complex)
    m = mats.shape[-1]
    norms = np.max(np.sum(np.abs(mats), axis=-1), axis=-1)
    top = float(np.max(norms)) if norms.size else 0.0
    squarings = max(0, int(np.ceil(np.log2(max(top, 1e-300)))) + 1) if top > 0.5 else 0
    scaled = mats / (2.0**squarings)
    eye = np.broadcast_to(np.eye(m, dtype=complex), mats.shape)
    result = eye.copy()
    for k in range(_TAYLOR_TERMS, 0, -1):
        result = eye + (scaled @ result) / k
    for _ in range(squarings):
        result = result @ result
    return result


def _sinc_like(e):
    """sin(e)/e with a series branch near 0; even in e, entire."""
    e = np.asarray(e, dtype=complex)
    small = np.abs(e) < _SINC_CUT
    out = np.empty_like(e)
    es = e[small] ** 2
    out[small] = 1.0 - es / 6.0 + es**2 / 120.0 - es**3 / 5040.0
    eb = e[~small]
    out[~small] = np.sin(eb) / eb
    return out


def schrodinger_transfer(v0, steps, zs):
    """Transfer matrices of (y', y) for -y'' + v0*y = z*y over signed steps.

    Entries [[cos(w s), -w sin(w s)], [sin(w s)/w, cos(w s)]] with
    w**2 = z - v0; even in w, hence entire in z.

    Returns
    -------
    ndarray, shape (nz, ns, 2, 2)
    """
    zs = np.asarray(zs, dtype=complex).ravel()
    steps = np.asarray(steps, dtype=float).ravel()
    om2 = zs - v0
    om = np.sqrt(om2)
    e = np.outer(om, steps)
    c = np.cos(e)
    s1 = _sinc_like(e) * steps[None, :]
    out = np.empty((zs.size, steps.size, 2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 0, 1] = -om2[:, None] * s1
    out[..., 1, 0] = s1
    out[..., 1, 1] = c
    return out


def schrodinger_core(v0, steps, zs):
    """M0(-s) @ Mz(s) for each spectral point z and signed step s.

    This is the z-dependent part of a canonical-system transfer across a
    constant-potential piece; conjugation by the zero-energy frame T is
    applied by the caller.

    Returns
    -------
    ndarray, shape (nz, ns, 2, 2)
    """
    steps = np.asarray(steps, dtype=float).ravel()
    mz = schrodinger_transfer(v0, steps, zs)
    m0 = schrodinger_transfer(v0, -steps, np.array([0.0 + 0.0j]))[0]
    return np.einsum("sij,zsjk->zsik", m0, mz, optimize=True)
