"""Phase dynamics (the system clock) and radial-basis forcing terms.

The phase s decays from 1 toward 0 and replaces explicit time in the
movement primitives. Forcing terms are phase-indexed weighted sums of
Gaussian basis functions, one term per degree of freedom, fitted to
demonstration data by locally weighted regression.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DegenerateBasis(ValueError):
    """A basis function received no support from the training phases."""


@dataclass(frozen=True)
class CanonicalSystem:
    """First-order phase decay tau * s' = -alpha_s * s with s in (0, 1]."""

    tau: float = 1.0
    alpha_s: float = 1.0
    s: float = 1.0


def phase_step(cs: CanonicalSystem, dt: float) -> CanonicalSystem:
    """One implicit-Euler step of the phase decay.

    The decay is linear, so the implicit update has the closed form
    s' = s / (1 + dt * alpha_s / tau), which is unconditionally stable
    and keeps s strictly positive and strictly decreasing.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    return CanonicalSystem(cs.tau, cs.alpha_s, cs.s / (1.0 + dt * cs.alpha_s / cs.tau))


def phase_sequence(tau: float, alpha_s: float, dt: float, n: int) -> np.ndarray:
    """Phases an n-sample rollout starting from s=1 will see, bit-identical
    to repeated phase_step calls."""
    d = 1.0 + dt * alpha_s / tau
    s = np.empty(n)
    s[0] = 1.0
    for k in range(1, n):
        s[k] = s[k - 1] / d
    return s


def rbf_centers_widths(n_basis: int, tau: float, alpha_s: float,
                       duration: float) -> tuple[np.ndarray, np.ndarray]:
    """Basis centers equally spaced in time, mapped through the phase decay.

    Widths are set from the gap to the next center (h_i = 1/gap^2), last
    width repeated, giving roughly constant overlap along the trajectory.
    """
    if n_basis < 2:
        raise ValueError("need at least 2 basis functions")
    t = np.linspace(0.0, duration, n_basis)
    centers = np.exp(-alpha_s * t / tau)
    gaps = np.diff(centers)
    widths = np.empty(n_basis)
    widths[:-1] = 1.0 / gaps**2
    widths[-1] = widths[-2]
    return centers, widths


@dataclass(frozen=True)
class ForcingTerm:
    """Fitted forcing profile for one degree of freedom.

    evaluate(s) = s * sum_i psi_i(s) theta_i / sum_i psi_i(s) with
    psi_i(s) = exp(-h_i (s - c_i)^2). The leading s factor makes the
    forcing vanish together with the phase, so the attractor dominates
    near the goal.
    """

    centers: np.ndarray
    widths: np.ndarray
    weights: np.ndarray

    def evaluate(self, s) -> float | np.ndarray:
        s_arr = np.asarray(s, dtype=float)
        scalar = s_arr.ndim == 0
        s_arr = np.atleast_1d(s_arr)
        psi = np.exp(-self.widths * (s_arr[:, None] - self.centers) ** 2)
        den = psi.sum(axis=1)
        out = np.zeros(len(s_arr))
        # zero outside basis support (phases past the demonstrated range):
        # the fit says nothing there and the attractor should take over
        ok = den > 0.0
        out[ok] = s_arr[ok] * (psi[ok] @ self.weights) / den[ok]
        return float(out[0]) if scalar else out


def fit_forcing(s_values, targets, n_basis: int, tau: float = 1.0,
                alpha_s: float = 1.0,
                duration: float | None = None) -> tuple[ForcingTerm, float]:
    """Fit basis weights to (phase, target) samples for one degree of freedom.

    Each weight is a separate weighted least-squares solution,
    theta_i = sum_t psi_i(s_t) s_t f_t / sum_t psi_i(s_t) s_t^2,
    exact for targets of the form f(s) = k * s. Returns the fitted term
    and the RMS reconstruction error on the training samples.

    Raises DegenerateBasis when a basis has (numerically) no support.
    """
    s = np.asarray(s_values, dtype=float)
    f = np.asarray(targets, dtype=float)
    if s.ndim != 1 or s.shape != f.shape:
        raise ValueError("phase and target arrays must be 1-D and congruent")
    if len(s) < n_basis:
        raise ValueError(f"need at least {n_basis} samples, got {len(s)}")
    if not np.all(np.diff(s) < 0.0):
        raise ValueError("phase values must be strictly decreasing")
    if duration is None:
        duration = -tau * np.log(float(s.min())) / alpha_s
    centers, widths = rbf_centers_widths(n_basis, tau, alpha_s, duration)
    psi = np.exp(-widths * (s[:, None] - centers) ** 2)
    den = psi.T @ (s * s)
    if np.any(den < 1e-12):
        raise DegenerateBasis("basis function never activated by the training phases")
    theta = (psi.T @ (s * f)) / den
    term = ForcingTerm(centers, widths, theta)
    rmse = float(np.sqrt(np.mean((term.evaluate(s) - f) ** 2)))
    return term, rmse
