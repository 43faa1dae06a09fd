"""Quaternion arithmetic on arrays of shape (..., 4), stored as (w, x, y, z)."""
import numpy as np


def qmul(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ], axis=-1)


def qconj(q):
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def normalize(q):
    q = np.asarray(q, dtype=float)
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def pure(u):
    """Embed 3-vectors as pure quaternions."""
    u = np.asarray(u, dtype=float)
    return np.concatenate([np.zeros(u.shape[:-1] + (1,)), u], axis=-1)


def _sinc(a):
    return np.sinc(a / np.pi)


def _sinc_slope(a):
    # (a cos a - sin a) / a**3, the derivative of sinc divided by a
    a = np.asarray(a, dtype=float)
    small = a < 1e-2
    safe = np.where(small, 1.0, a)
    direct = (safe * np.cos(safe) - np.sin(safe)) / safe ** 3
    a2 = a * a
    series = -1.0 / 3.0 + a2 / 30.0 - a2 * a2 / 840.0
    return np.where(small, series, direct)


def qexp(u):
    """Exponential of the pure quaternion with vector part ``u``."""
    u = np.asarray(u, dtype=float)
    a = np.linalg.norm(u, axis=-1, keepdims=True)
    return np.concatenate([np.cos(a), _sinc(a) * u], axis=-1)


def qlog(q):
    """Vector part of the principal logarithm of a unit quaternion."""
    q = np.asarray(q, dtype=float)
    w = q[..., :1]
    x = q[..., 1:]
    s = np.linalg.norm(x, axis=-1, keepdims=True)
    angle = np.arctan2(s, w)
    factor = np.where(s > 0, angle / np.where(s > 0, s, 1.0), 1.0)
    return factor * x


def dexp(u, du):
    """Derivative of ``qexp`` at ``u`` applied to ``du``."""
    u = np.asarray(u, dtype=float)
    du = np.asarray(du, dtype=float)
    a = np.linalg.norm(u, axis=-1, keepdims=True)
    ud = np.sum(u * du, axis=-1, keepdims=True)
    dw = -_sinc(a) * ud
    dx = _sinc(a) * du + _sinc_slope(a) * ud * u
    return np.concatenate([dw, dx], axis=-1)


def exp_jacobian(u):
    """Matrix of ``dexp(u, .)``, shape (..., 4, 3)."""
    u = np.asarray(u, dtype=float)
    cols = [dexp(u, np.broadcast_to(e, u.shape)) for e in np.eye(3)]
    return np.stack(cols, axis=-1)


def dlog(q, dq):
    """Derivative of ``qlog`` at unit ``q`` applied to a tangent ``dq``."""
    u = qlog(q)
    J = exp_jacobian(u)
    Jt = np.swapaxes(J, -1, -2)
    rhs = (Jt @ np.asarray(dq, dtype=float)[..., None])
    return np.linalg.solve(Jt @ J, rhs)[..., 0]


def rotate(q, v):
    """Rotate 3-vectors ``v`` by unit quaternions ``q``."""
    return qmul(qmul(q, pure(v)), qconj(q))[..., 1:]
