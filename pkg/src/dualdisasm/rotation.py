"""Small quaternion and rotation-vector toolkit.

Quaternions are stored as ``(x, y, z, w)`` numpy arrays everywhere in the
package, matching the on-disk formats.
"""

from __future__ import annotations

import numpy as np

IDENTITY = np.array([0.0, 0.0, 0.0, 1.0])


class QuaternionError(ValueError):
    """Raised when a quaternion is not unit-norm within tolerance."""


def check_unit(q, tol: float = 1e-6) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (4,) or not np.all(np.isfinite(q)):
        raise QuaternionError(f"expected a finite 4-vector, got {q!r}")
    n = np.linalg.norm(q)
    if abs(n - 1.0) > tol:
        raise QuaternionError(f"quaternion norm {n:.9g} deviates from 1 by more than {tol}")
    return q


def normalize(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q / np.linalg.norm(q)


def multiply(a, b) -> np.ndarray:
    """Hamilton product ``a * b`` (apply ``b`` first, then ``a``)."""
    ax, ay, az, aw = a
    bx, by, bz, bw = b
    return np.array([
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
        aw * bw - ax * bx - ay * by - az * bz,
    ])


def conjugate(q) -> np.ndarray:
    return np.array([-q[0], -q[1], -q[2], q[3]])


def rotate(q, v) -> np.ndarray:
    return to_matrix(q) @ np.asarray(v, dtype=float)


def to_matrix(q) -> np.ndarray:
    x, y, z, w = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def from_matrix(m) -> np.ndarray:
    """Quaternion of a proper rotation matrix (Shepperd's method), with w >= 0."""
    m = np.asarray(m, dtype=float)
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    if tr > 0:
        s = 2.0 * np.sqrt(tr + 1.0)
        q = np.array([(m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s,
                      (m[1, 0] - m[0, 1]) / s, 0.25 * s])
    elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
        s = 2.0 * np.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2])
        q = np.array([0.25 * s, (m[0, 1] + m[1, 0]) / s,
                      (m[0, 2] + m[2, 0]) / s, (m[2, 1] - m[1, 2]) / s])
    elif m[1, 1] > m[2, 2]:
        s = 2.0 * np.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2])
        q = np.array([(m[0, 1] + m[1, 0]) / s, 0.25 * s,
                      (m[1, 2] + m[2, 1]) / s, (m[0, 2] - m[2, 0]) / s])
    else:
        s = 2.0 * np.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1])
        q = np.array([(m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s,
                      0.25 * s, (m[1, 0] - m[0, 1]) / s])
    q = normalize(q)
    return -q if q[3] < 0 else q


def from_rotvec(v) -> np.ndarray:
    """Quaternion exponential of an axis-angle vector."""
    v = np.asarray(v, dtype=float)
    angle = np.linalg.norm(v)
    if angle < 1e-12:
        # second-order Taylor keeps tiny corrections exact to machine precision
        q = np.array([0.5 * v[0], 0.5 * v[1], 0.5 * v[2], 1.0 - angle * angle / 8.0])
        return normalize(q)
    axis = v / angle
    s = np.sin(0.5 * angle)
    return np.array([axis[0] * s, axis[1] * s, axis[2] * s, np.cos(0.5 * angle)])


def to_rotvec(q) -> np.ndarray:
    """Axis-angle vector of ``q`` with angle in [0, pi]."""
    q = np.asarray(q, dtype=float)
    if q[3] < 0:
        q = -q
    s = np.linalg.norm(q[:3])
    if s < 1e-12:
        return 2.0 * q[:3]
    angle = 2.0 * np.arctan2(s, q[3])
    return q[:3] / s * angle


def rotvec_matrix(v) -> np.ndarray:
    """Rodrigues formula, rotation vector to matrix."""
    v = np.asarray(v, dtype=float)
    angle = np.linalg.norm(v)
    k = skew(v)
    if angle < 1e-8:
        return np.eye(3) + k + 0.5 * k @ k
    a = np.sin(angle) / angle
    b = (1.0 - np.cos(angle)) / (angle * angle)
    return np.eye(3) + a * k + b * (k @ k)


def matrix_rotvec(m) -> np.ndarray:
    return to_rotvec(from_matrix(m))


def cross(a, b) -> np.ndarray:
    """3-vector cross product; much cheaper than ``np.cross`` for single vectors."""
    return np.array([a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])


def tangent_basis(normal) -> tuple:
    """Deterministic orthonormal ``(u, v)`` spanning the plane normal to ``normal``."""
    n = np.asarray(normal, dtype=float)
    k = int(np.argmin(np.abs(n)))
    e = np.zeros(3)
    e[k] = 1.0
    u = e - np.dot(e, n) * n
    u /= np.linalg.norm(u)
    return u, cross(n, u)


def skew(v) -> np.ndarray:
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def angle_between(a, b) -> float:
    """Rotation angle separating two orientations, in [0, pi] (sign-insensitive).

    Equal to ``2 acos(|a.b|)`` but evaluated as ``4 atan2(|a - sb|, |a + sb|)``,
    which stays accurate for nearly identical orientations.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if float(np.dot(a, b)) < 0.0:
        b = -b
    return 4.0 * float(np.arctan2(np.linalg.norm(a - b), np.linalg.norm(a + b)))


def slerp(a, b, u: float) -> np.ndarray:
    """Shortest-arc spherical interpolation, ``u`` in [0, 1]."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = float(np.dot(a, b))
    if d < 0.0:
        b = -b
        d = -d
    if d > 1.0 - 1e-12:
        return normalize(a + u * (b - a))
    omega = np.arccos(d)
    so = np.sin(omega)
    return (np.sin((1.0 - u) * omega) / so) * a + (np.sin(u * omega) / so) * b


def random_quaternions(rng: np.random.Generator, n: int) -> np.ndarray:
    q = rng.normal(size=(n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)
