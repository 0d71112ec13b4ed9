"""Small-dimension complex linear algebra: states, Hermitian observables, spins.

Everything here works on Hilbert spaces of dimension 2 to 8. Values are
immutable; arrays stored on the dataclasses are flagged read-only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

MAX_DIM = 8
NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _frozen(arr):
    arr = np.array(arr)
    arr.setflags(write=False)
    return arr


def fix_phase(vec):
    """Multiply ``vec`` by a global phase so its first nonzero entry is real and >= 0."""
    vec = np.asarray(vec, dtype=complex)
    mags = np.abs(vec)
    idx = np.flatnonzero(mags > 1e-14 * max(mags.max(), 1e-300))
    if idx.size == 0:
        return vec.copy()
    first = vec[idx[0]]
    return vec * (np.conj(first) / abs(first))


@dataclass(frozen=True, eq=False)
class SystemState:
    """Normalized pure state of the measured system."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size < 2 or amps.size > MAX_DIM:
            raise ValidationError(
                f"state dimension must be in [2, {MAX_DIM}], got {amps.size}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"state is not normalized (norm = {norm!r})")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def normalized(cls, amplitudes):
        """Build a state from any nonzero vector by rescaling it to unit norm."""
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValidationError("cannot normalize the zero vector")
        return cls(amps / norm)

    @property
    def dim(self):
        return self.amplitudes.size

    def inner(self, other):
        """Return ``<self|other>``."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class ObservableOp:
    """Hermitian operator together with its spectral decomposition.

    Build instances with :meth:`from_matrix`; the eigen-data is computed
    once and cached on the instance.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def from_matrix(cls, matrix):
        mat = _check_hermitian(matrix)
        vals, vecs = _eigh_array(mat)
        return cls(_frozen(mat), _frozen(vals), _frozen(vecs))

    @property
    def dim(self):
        return self.matrix.shape[0]

    def projector(self, value, tol=1e-9):
        """Spectral projector onto the eigenspace of ``value``."""
        mask = np.abs(self.eigenvalues - value) <= tol
        if not mask.any():
            raise ValidationError(f"{value!r} is not an eigenvalue")
        v = self.eigenvectors[:, mask]
        return v @ v.conj().T


def _check_hermitian(matrix):
    mat = np.asarray(matrix, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValidationError(f"observable must be square, got shape {mat.shape}")
    if not 2 <= mat.shape[0] <= MAX_DIM:
        raise ValidationError(
            f"observable dimension must be in [2, {MAX_DIM}], got {mat.shape[0]}")
    if not np.all(np.isfinite(mat)):
        raise ValidationError("observable has non-finite entries")
    scale = max(1.0, float(np.abs(mat).max()))
    if np.abs(mat - mat.conj().T).max() > HERMITIAN_TOL * scale:
        raise ValidationError("observable is not Hermitian")
    # Symmetrize away the sub-tolerance antihermitian residue.
    return 0.5 * (mat + mat.conj().T)


def _eigh_array(mat):
    vals, vecs = np.linalg.eigh(mat)
    vecs = np.column_stack([fix_phase(vecs[:, k]) for k in range(vecs.shape[1])])
    return vals, vecs


def eigh(obs):
    """Eigenvalues (ascending) and column eigenvectors of a Hermitian operator.

    Accepts an :class:`ObservableOp` or a raw square matrix. Eigenvectors
    follow the package phase convention: first nonzero component real and
    nonnegative.
    """
    if isinstance(obs, ObservableOp):
        return np.array(obs.eigenvalues), np.array(obs.eigenvectors)
    return _eigh_array(_check_hermitian(obs))


def as_direction(vec):
    """Validate a unit 3-vector and return it as a float array."""
    v = np.asarray(vec, dtype=float).reshape(-1)
    if v.size != 3:
        raise ValidationError(f"direction must have 3 components, got {v.size}")
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValidationError(f"direction is not a unit vector (norm = {norm!r})")
    return v


def direction_from_angles(polar, azimuth):
    """Unit vector ``(sin(polar) cos(azimuth), sin(polar) sin(azimuth), cos(polar))``."""
    return np.array([np.sin(polar) * np.cos(azimuth),
                     np.sin(polar) * np.sin(azimuth),
                     np.cos(polar)])


def spin_observable(n):
    """The spin-1/2 observable ``n . sigma`` for a unit direction ``n``."""
    n = as_direction(n)
    return ObservableOp.from_matrix(n[0] * PAULI_X + n[1] * PAULI_Y + n[2] * PAULI_Z)


def bloch_to_spinor(n):
    """Spin-up eigenstate of ``n . sigma``."""
    n = as_direction(n)
    # atan2 keeps the polar angle accurate near the poles, where arccos does not
    polar = np.arctan2(np.hypot(n[0], n[1]), n[2])
    azimuth = np.arctan2(n[1], n[0])
    amps = np.array([np.cos(polar / 2), np.exp(1j * azimuth) * np.sin(polar / 2)])
    return SystemState(fix_phase(amps / np.linalg.norm(amps)))


def evolve_state(state, hamiltonian, duration):
    """Apply ``exp(-i H duration)`` to ``state``; ``duration`` is time over hbar."""
    if not isinstance(hamiltonian, ObservableOp):
        hamiltonian = ObservableOp.from_matrix(hamiltonian)
    if hamiltonian.dim != state.dim:
        raise ValidationError("state and Hamiltonian dimensions differ")
    vals, vecs = hamiltonian.eigenvalues, hamiltonian.eigenvectors
    coeffs = vecs.conj().T @ state.amplitudes
    out = vecs @ (np.exp(-1j * vals * duration) * coeffs)
    return SystemState.normalized(out)


def expectation(state, obs):
    """Real expectation value ``<s|A|s>``."""
    mat = obs.matrix if isinstance(obs, ObservableOp) else np.asarray(obs)
    return float(np.real(np.vdot(state.amplitudes, mat @ state.amplitudes)))
