"""Small dense linear algebra and spin-1/2 operators.

Two-spin operators use control-major ordering: the first label is the
control spin ``b`` and the second is the target spin ``a``, so the basis is
``|up up>, |up down>, |down up>, |down down>`` with ``b`` written first.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10

UP = np.array([1.0, 0.0], dtype=complex)
DOWN = np.array([0.0, 1.0], dtype=complex)
PLUS = (UP + DOWN) / np.sqrt(2.0)
MINUS = (UP - DOWN) / np.sqrt(2.0)

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

SITES = ("a", "b")


class UndefinedPhaseError(ValueError):
    """Raised when a phase is requested between (nearly) orthogonal states."""


def angular_momentum(axis: str) -> np.ndarray:
    """Spin-1/2 angular momentum operator ``sigma_axis / 2``."""
    try:
        return _PAULI[axis] / 2.0
    except KeyError:
        raise ValueError(f"axis must be one of 'x', 'y', 'z', got {axis!r}") from None


def embed(op: np.ndarray, site: str) -> np.ndarray:
    """Lift a single-spin operator onto the two-spin space.

    Parameters
    ----------
    op : (2, 2) array
        Single-spin operator.
    site : {'a', 'b'}
        ``'b'`` is the control (first tensor factor), ``'a'`` the target.

    Returns
    -------
    (4, 4) ndarray
    """
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise ValueError(f"expected a 2x2 operator, got shape {op.shape}")
    eye = np.eye(2, dtype=complex)
    if site == "b":
        return np.kron(op, eye)
    if site == "a":
        return np.kron(eye, op)
    raise ValueError(f"site must be 'a' or 'b', got {site!r}")


def is_hermitian(mat: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    mat = np.asarray(mat)
    return mat.ndim == 2 and mat.shape[0] == mat.shape[1] and np.allclose(
        mat, mat.conj().T, rtol=0.0, atol=tol
    )


def is_unitary(mat: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    mat = np.asarray(mat)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        return False
    dev = mat @ mat.conj().T - np.eye(mat.shape[0])
    return float(np.max(np.abs(dev))) <= tol


def expm_hermitian(H: np.ndarray, t: float) -> np.ndarray:
    """Propagator ``exp(-i H t)`` of a Hermitian generator (hbar = 1).

    Computed from the eigendecomposition of ``H``; the result is unitary to
    machine precision for the small matrices used here.

    Raises
    ------
    ValueError
        If ``H`` is not Hermitian within ``1e-12`` (scaled by its norm).
    """
    H = np.asarray(H, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(H))) if H.size else 1.0)
    if not is_hermitian(H, HERMITIAN_TOL * scale):
        raise ValueError("expm_hermitian requires a Hermitian matrix")
    H = 0.5 * (H + H.conj().T)
    evals, evecs = np.linalg.eigh(H)
    return (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T


def rotation(axis_vector, angle: float) -> np.ndarray:
    """Single-spin rotation ``exp(-i angle n.I)`` about a unit vector ``n``."""
    n = np.asarray(axis_vector, dtype=float)
    n = n / np.linalg.norm(n)
    generator = sum(c * angular_momentum(ax) for c, ax in zip(n, "xyz"))
    return expm_hermitian(generator, angle)


def bloch_vector(state: np.ndarray) -> np.ndarray:
    """Bloch vector ``(2<Ix>, 2<Iy>, 2<Iz>)`` of a single spin.

    Accepts a normalized 2-component ket or a 2x2 density matrix. Global
    phase of a ket does not affect the result.
    """
    state = np.asarray(state, dtype=complex)
    if state.shape == (2,):
        rho = np.outer(state, state.conj())
    elif state.shape == (2, 2):
        rho = state
    else:
        raise ValueError(f"expected a single-spin state, got shape {state.shape}")
    return np.array(
        [np.real(np.trace(rho @ _PAULI[ax])) for ax in "xyz"], dtype=float
    )


def wrap_phase(phi):
    """Map angles onto the branch ``(-pi, pi]``."""
    wrapped = np.pi - np.mod(np.pi - np.asarray(phi, dtype=float), 2.0 * np.pi)
    return float(wrapped) if np.ndim(wrapped) == 0 else wrapped


def overlap_phase(psi1: np.ndarray, psi2: np.ndarray, tol: float = 1e-9) -> float:
    """``arg <psi1|psi2>`` on ``(-pi, pi]``.

    Raises
    ------
    UndefinedPhaseError
        If ``|<psi1|psi2>| <= tol``.
    """
    amp = np.vdot(psi1, psi2)
    if abs(amp) <= tol:
        raise UndefinedPhaseError(
            f"phase undefined for near-orthogonal states (|overlap| = {abs(amp):.3g})"
        )
    return wrap_phase(np.angle(amp))
