"""State estimation from a fixed budget of linear measurements of a Hilbert vector.

Coordinates live in an orthonormal basis of the ambient space, so each
measurement functional is a plain vector (its Riesz representer) and
orthogonal projection is matrix arithmetic.  Given a reduced space V_n
believed to approximate the unknown state well, the module computes

  - the inverse stability constant mu = 1/sigma_min of the cross-Gramian
    between orthonormal bases of V_n and the measurement span W,
  - the best-fit estimator over V_n (least squares against the projected
    data) and its data-consistent correction, which interpolates the
    measurements exactly,
  - the exact stability/norm constants (alpha, beta, mu) for the Euclidean
    and measurement-span norms on the data side.

Recovery quality degrades gracefully with mu: both estimators satisfy
max(||u - u_tilde||, ||u - u_star||) <= mu (e_n(u) + ||eta||_W), where
e_n(u) is the distance from u to V_n and eta the measurement noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_SMIN_TOL = 1e-12


class UnstableConfiguration(RuntimeError):
    """The reduced space contains directions invisible to the measurements."""


@dataclass(frozen=True)
class HilbertProblem:
    """Ambient dimension, reduced-space basis, and measurement representers.

    Vn_basis has the n spanning vectors of V_n as columns (D x n); meas has
    the m measurement representers as rows (m x D).  The rows must be
    linearly independent; finite stability additionally needs n <= m.
    """

    D: int
    Vn_basis: np.ndarray
    meas: np.ndarray

    def __post_init__(self) -> None:
        vn = np.array(self.Vn_basis, dtype=float)
        ms = np.array(self.meas, dtype=float)
        if vn.ndim != 2 or ms.ndim != 2:
            raise ValueError("Vn_basis and meas must be matrices")
        if vn.shape[0] != self.D or ms.shape[1] != self.D:
            raise ValueError("ambient dimensions disagree")
        if not (np.isfinite(vn).all() and np.isfinite(ms).all()):
            raise ValueError("entries must be finite")
        if ms.shape[0] > self.D:
            raise ValueError("more measurements than ambient dimensions")
        sv = np.linalg.svd(ms, compute_uv=False)
        if sv[-1] <= _SMIN_TOL * sv[0]:
            raise ValueError("measurement rows are linearly dependent")
        sv = np.linalg.svd(vn, compute_uv=False)
        if sv[-1] <= _SMIN_TOL * sv[0]:
            raise ValueError("reduced-space basis is rank deficient")
        vn.setflags(write=False)
        ms.setflags(write=False)
        object.__setattr__(self, "Vn_basis", vn)
        object.__setattr__(self, "meas", ms)

    @property
    def n(self) -> int:
        return self.Vn_basis.shape[1]

    @property
    def m(self) -> int:
        return self.meas.shape[0]


@dataclass(frozen=True)
class NormTriplet:
    """Stability constants of a data-side norm: always alpha * mu >= 1."""

    alpha: float
    beta: float
    mu: float
    norm_id: str


def _onb(columns: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(columns)
    return q


def mu_stability(problem: HilbertProblem) -> float:
    """Inverse of the smallest cross-Gramian singular value.

    Equals the largest ratio ||v|| / ||P_W v|| over v in V_n.  Raises
    UnstableConfiguration when some direction of V_n is numerically
    orthogonal to the measurement span (always the case for n > m).
    """
    if problem.n > problem.m:
        raise UnstableConfiguration("n > m leaves unobserved directions")
    v_onb = _onb(problem.Vn_basis)
    w_onb = _onb(problem.meas.T)
    cross = v_onb.T @ w_onb
    smin = float(np.linalg.svd(cross, compute_uv=False)[-1])
    if smin < _SMIN_TOL:
        raise UnstableConfiguration("reduced space nearly orthogonal to W")
    # Cross-Gramian singular values are cosines of principal angles; clip
    # roundoff above 1 so that mu >= 1 holds exactly.
    return 1.0 / min(smin, 1.0)


def riesz_norm(problem: HilbertProblem, z: np.ndarray) -> float:
    """Norm of the minimum-norm preimage of the data vector z.

    This is the norm z inherits from the ambient space through the
    measurement map; it is the data-side norm with the best stability
    constants.
    """
    z = np.asarray(z, dtype=float)
    v = np.linalg.lstsq(problem.meas, z, rcond=None)[0]
    return float(np.linalg.norm(v))


def best_fit(problem: HilbertProblem, z: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares estimator over V_n against the observed data.

    Returns the minimizer of ||P_W v - w|| over v in V_n, with w the
    minimum-norm preimage of z, together with the attained misfit.  Unique
    whenever the stability constant is finite (checked; raises
    UnstableConfiguration otherwise).
    """
    mu_stability(problem)
    z = np.asarray(z, dtype=float)
    w = np.linalg.lstsq(problem.meas, z, rcond=None)[0]
    w_onb = _onb(problem.meas.T)
    a = w_onb.T @ problem.Vn_basis
    b = w_onb.T @ w
    coef = np.linalg.lstsq(a, b, rcond=None)[0]
    u_tilde = problem.Vn_basis @ coef
    residual = float(np.linalg.norm(a @ coef - b))
    return u_tilde, residual


def generalized_interpolation(problem: HilbertProblem, z: np.ndarray) -> np.ndarray:
    """Best fit corrected to agree with the observed data exactly.

    Returns u_star = u_tilde + (w - P_W u_tilde); the correction lies in W,
    reproduces the data (meas @ u_star = z up to solver precision), and in
    the noiseless case can only improve on the best fit.
    """
    u_tilde, _ = best_fit(problem, z)
    z = np.asarray(z, dtype=float)
    w = np.linalg.lstsq(problem.meas, z, rcond=None)[0]
    w_onb = _onb(problem.meas.T)
    return u_tilde + w - w_onb @ (w_onb.T @ u_tilde)


def e_n(problem: HilbertProblem, u: np.ndarray) -> float:
    """Distance from u to the reduced space V_n."""
    u = np.asarray(u, dtype=float)
    v_onb = _onb(problem.Vn_basis)
    return float(np.linalg.norm(u - v_onb @ (v_onb.T @ u)))


def norm_constants(problem: HilbertProblem, norm_id: str, p: float = 2.0) -> NormTriplet:
    """Exact stability constants of a data-side norm, via singular values.

    For the Euclidean data norm: alpha = sigma_max(meas), beta = 1 (p = 2),
    mu = 1/sigma_min(meas restricted to V_n).  For the measurement-span
    norm: alpha = 1, beta = 1/sigma_min(meas), mu = the cross-Gramian
    constant.  Only p = 2 admits exact beta values, so other p are
    rejected.
    """
    if norm_id not in ("l2", "riesz"):
        raise ValueError(f"unknown norm_id: {norm_id}")
    if p != 2.0:
        raise ValueError("norm constants are exact only for p = 2")
    s_meas = np.linalg.svd(problem.meas, compute_uv=False)
    if norm_id == "l2":
        v_onb = _onb(problem.Vn_basis)
        s = np.linalg.svd(problem.meas @ v_onb, compute_uv=False)
        smin = float(s[-1]) if problem.n <= problem.m else 0.0
        if smin < _SMIN_TOL:
            raise UnstableConfiguration("reduced space unobservable in l2")
        return NormTriplet(
            alpha=float(s_meas[0]), beta=1.0, mu=1.0 / smin, norm_id="l2"
        )
    return NormTriplet(
        alpha=1.0,
        beta=1.0 / float(s_meas[-1]),
        mu=mu_stability(problem),
        norm_id="riesz",
    )


def random_problem(D: int, m: int, n: int, seed: int) -> HilbertProblem:
    """Gaussian measurement representers and reduced basis (deterministic)."""
    rng = np.random.default_rng(seed)
    meas = rng.standard_normal((m, D))
    vn = rng.standard_normal((D, n))
    return HilbertProblem(D=D, Vn_basis=vn, meas=meas)
