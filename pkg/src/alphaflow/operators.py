"""Composite nonlinear operators of the alpha model.

Defines transport and filtered-transport terms, the momentum and stress
equation residuals of a smooth test pair, the Gronwall weight used by
the dissipative-inequality checker, and the cancellation identities the
energy law rests on.  Every nonlinear product is formed in real space
from dealiased factors and dealiased again, so the trilinear identities
hold to roundoff.
"""

from __future__ import annotations

import json
from math import comb

import numpy as np

from . import spectral as sp
from .errors import ContractViolation
from .fields import (
    PhysicalParams,
    SpinField,
    StressField,
    VelocityField,
    strain,
    upper_indices,
    vorticity,
)
from .spectral import Grid


def advect(u: VelocityField, q_hat: np.ndarray) -> np.ndarray:
    """Transport term sum_i u_i d q / dx_i, dealiased.

    ``q_hat`` may carry any leading component axes (scalar, vector, or
    tensor entries); the result has the same layout.
    """
    grid = u.grid
    u_vals = u.values
    out = np.zeros(np.shape(q_hat))
    for a in range(grid.dim):
        dq = sp.to_real(grid, sp.spectral_derivative(grid, q_hat, a))
        out += u_vals[a] * dq
    return sp.dealias(grid, sp.to_spectral(grid, out))


def grad_transpose(v_hat: np.ndarray, u: VelocityField) -> np.ndarray:
    """sum_i v_i grad(u_i), dealiased.  Returns a vector in spectral form."""
    grid = u.grid
    if v_hat.shape != (grid.dim,) + grid.shape:
        raise ContractViolation("v must be a vector field on the same grid")
    v_vals = sp.to_real(grid, v_hat)
    out = np.zeros((grid.dim,) + grid.shape)
    for i in range(grid.dim):
        grad_ui = sp.to_real(grid, sp.gradient_hat(grid, u.hat[i]))
        out += v_vals[i] * grad_ui
    return sp.dealias(grid, sp.to_spectral(grid, out))


def stress_divergence(sigma: StressField) -> np.ndarray:
    """(div sigma)_j = sum_i d sigma_ij / dx_i, in spectral form."""
    grid = sigma.grid
    out = np.zeros((grid.dim,) + grid.shape, dtype=complex)
    for j in range(grid.dim):
        for i in range(grid.dim):
            out[j] += 1j * grid.k[i] * sigma.entry_hat(i, j)
    return out


def commutator_hat(sigma: StressField, w: SpinField) -> np.ndarray:
    """Upper-triangle spectral coefficients of sigma W - W sigma."""
    grid = sigma.grid
    s = sigma.matrix_values()
    a = w.matrix_values()
    comm = np.einsum("ik...,kj...->ij...", s, a) - np.einsum("ik...,kj...->ij...", a, s)
    entries = np.stack([comm[i, j] for i, j in upper_indices(grid.dim)])
    return sp.dealias(grid, sp.to_spectral(grid, entries))


class TestPair:
    """Smooth test trajectory (velocity part, stress part).

    Space dependence is a trigonometric polynomial on the grid; time
    dependence is polynomial, stored as spectral coefficient arrays per
    power of t.  Time derivatives are therefore exact (polynomial
    differentiation), never finite-differenced.

    The velocity coefficients are Leray-projected, mean-free, and
    dealiased at construction, so the pair is admissible at every time.
    """

    __test__ = False  # not a pytest suite despite the name

    def __init__(self, grid: Grid, velocity_coeffs: np.ndarray,
                 stress_coeffs: np.ndarray | None = None, *,
                 sanitize: bool = True):
        n_upper = len(upper_indices(grid.dim))
        velocity_coeffs = np.asarray(velocity_coeffs, dtype=complex)
        if velocity_coeffs.ndim != grid.dim + 2 or \
                velocity_coeffs.shape[1:] != (grid.dim,) + grid.shape:
            raise ContractViolation(
                "velocity coefficients must have shape (degree+1, dim, n, ..., n)"
            )
        if stress_coeffs is None:
            stress_coeffs = np.zeros((1, n_upper) + grid.shape, dtype=complex)
        stress_coeffs = np.asarray(stress_coeffs, dtype=complex)
        if stress_coeffs.shape[1:] != (n_upper,) + grid.shape:
            raise ContractViolation(
                "stress coefficients must have shape (degree+1, entries, n, ..., n)"
            )
        if sanitize:
            velocity_coeffs = np.stack([
                sp.leray_project(grid, sp.dealias(grid, c)) for c in velocity_coeffs
            ])
            velocity_coeffs[(slice(None), slice(None)) + (0,) * grid.dim] = 0.0
            stress_coeffs = np.stack([sp.dealias(grid, c) for c in stress_coeffs])
        self.grid = grid
        self.velocity_coeffs = velocity_coeffs
        self.stress_coeffs = stress_coeffs

    @classmethod
    def zero(cls, grid: Grid) -> "TestPair":
        vc = np.zeros((1, grid.dim) + grid.shape, dtype=complex)
        return cls(grid, vc, sanitize=False)

    @classmethod
    def random(cls, grid: Grid, seed: int, degree: int = 2,
               max_wavenumber: int = 3, amplitude: float = 1.0,
               with_stress: bool = True) -> "TestPair":
        """Low-wavenumber random pair, reproducible by seed."""
        rng = np.random.default_rng(seed)
        kmax = min(max_wavenumber, grid.dealias_cutoff)
        n_upper = len(upper_indices(grid.dim))
        vc = np.zeros((degree + 1, grid.dim) + grid.shape, dtype=complex)
        tc = np.zeros((degree + 1, n_upper) + grid.shape, dtype=complex)
        scale = amplitude * grid.size / (2 * kmax + 1) ** grid.dim
        for p in range(degree + 1):
            for kvec in np.ndindex(*((2 * kmax + 1,) * grid.dim)):
                k = tuple(int(c) - kmax for c in kvec)
                if all(c == 0 for c in k):
                    continue
                idx = grid.mode_index(k)
                conj_idx = grid.mode_index(tuple(-c for c in k))
                amp_v = rng.standard_normal(grid.dim) + 1j * rng.standard_normal(grid.dim)
                amp_t = rng.standard_normal(n_upper) + 1j * rng.standard_normal(n_upper)
                vc[(p, slice(None)) + idx] += scale * amp_v
                vc[(p, slice(None)) + conj_idx] += scale * np.conj(amp_v)
                if with_stress:
                    tc[(p, slice(None)) + idx] += scale * amp_t
                    tc[(p, slice(None)) + conj_idx] += scale * np.conj(amp_t)
        return cls(grid, vc, tc if with_stress else None)

    @classmethod
    def from_trajectory(cls, trajectory, degree: int) -> "TestPair":
        """Least-squares polynomial fit of a trajectory's snapshots.

        The fit is performed in a Chebyshev basis on the snapshot
        interval for conditioning, converted back to powers of t, and
        pinned to interpolate the initial data exactly at t = 0.
        """
        snaps = trajectory.snapshots
        if len(snaps) < degree + 2:
            raise ContractViolation(
                f"need at least {degree + 2} snapshots to fit degree {degree}"
            )
        grid = trajectory.grid
        times = np.array([s.t for s in snaps])
        span = times[-1] - times[0]
        if span <= 0:
            raise ContractViolation("trajectory must span positive time")

        def fit_block(stack):  # stack: (n_snap, components, *grid.shape)
            n_snap = stack.shape[0]
            flat = stack.reshape(n_snap, -1)
            x = 2.0 * (times - times[0]) / span - 1.0
            basis = np.polynomial.chebyshev.chebvander(x, degree)
            cheb, *_ = np.linalg.lstsq(basis, flat, rcond=None)
            # Chebyshev in x -> powers of x -> powers of t via the affine map.
            c2p = np.zeros((degree + 1, degree + 1))
            for p in range(degree + 1):
                unit = np.zeros(p + 1)
                unit[p] = 1.0
                c2p[: p + 1, p] = np.polynomial.chebyshev.cheb2poly(unit)
            powers = c2p @ cheb
            a = 2.0 / span
            b = -1.0 - 2.0 * times[0] / span
            in_t = np.zeros_like(powers)
            for p in range(degree + 1):
                for m in range(p + 1):
                    in_t[m] += powers[p] * comb(p, m) * (a**m) * (b ** (p - m))
            coeffs = in_t.reshape((degree + 1,) + stack.shape[1:])
            coeffs[0] = stack[0]  # exact interpolation of the initial data
            return coeffs

        vc = fit_block(np.stack([s.u.hat for s in snaps]))
        tc = fit_block(np.stack([s.sigma.hat for s in snaps]))
        return cls(grid, vc, tc, sanitize=False)

    @classmethod
    def from_json(cls, grid: Grid, doc: dict | str) -> "TestPair":
        """Build a pair from a trigonometric-mode listing.

        Each velocity entry: {"k": [..], "component": i, "cos": [c0, c1,
        ...], "sin": [...]} contributing (sum_p c_p t^p) cos(k.x) plus
        the sine part to that component.  Stress entries use "entry":
        [i, j] instead of "component".  Velocity modes are projected to
        the divergence-free subspace on construction.
        """
        if isinstance(doc, str):
            doc = json.loads(doc)
        if int(doc.get("dim", grid.dim)) != grid.dim:
            raise ContractViolation("test pair dimension does not match grid")
        pairs = upper_indices(grid.dim)

        def poly(entry):
            cos = [float(c) for c in entry.get("cos", [])]
            sin = [float(c) for c in entry.get("sin", [])]
            deg = max(len(cos), len(sin), 1) - 1
            cos += [0.0] * (deg + 1 - len(cos))
            sin += [0.0] * (deg + 1 - len(sin))
            return np.array(cos), np.array(sin)

        v_entries = doc.get("velocity_modes", [])
        t_entries = doc.get("stress_modes", [])
        deg = 0
        for entry in v_entries + t_entries:
            cos, sin = poly(entry)
            deg = max(deg, len(cos) - 1)
        vc = np.zeros((deg + 1, grid.dim) + grid.shape, dtype=complex)
        tc = np.zeros((deg + 1, len(pairs)) + grid.shape, dtype=complex)

        def add(target, comp, kvec, cos, sin):
            # cos(k.x) -> 1/2 at +/-k; sin(k.x) -> -i/2 at +k, +i/2 at -k
            idx = grid.mode_index(kvec)
            conj_idx = grid.mode_index([-c for c in kvec])
            half = 0.5 * grid.size
            for p in range(len(cos)):
                target[(p, comp) + idx] += half * (cos[p] - 1j * sin[p])
                target[(p, comp) + conj_idx] += half * (cos[p] + 1j * sin[p])

        for entry in v_entries:
            cos, sin = poly(entry)
            cos = np.pad(cos, (0, deg + 1 - len(cos)))
            sin = np.pad(sin, (0, deg + 1 - len(sin)))
            add(vc, int(entry["component"]), entry["k"], cos, sin)
        for entry in t_entries:
            cos, sin = poly(entry)
            cos = np.pad(cos, (0, deg + 1 - len(cos)))
            sin = np.pad(sin, (0, deg + 1 - len(sin)))
            i, j = (int(c) for c in entry["entry"])
            if i > j:
                i, j = j, i
            add(tc, pairs.index((i, j)), entry["k"], cos, sin)
        return cls(grid, vc, tc)

    # -- evaluation ----------------------------------------------------

    @property
    def has_stress(self) -> bool:
        return bool(np.any(self.stress_coeffs != 0))

    @staticmethod
    def _poly_eval(coeffs: np.ndarray, t: float) -> np.ndarray:
        out = np.zeros_like(coeffs[0])
        for c in coeffs[::-1]:
            out = out * t + c
        return out

    @staticmethod
    def _poly_rate(coeffs: np.ndarray, t: float) -> np.ndarray:
        out = np.zeros_like(coeffs[0])
        degree = coeffs.shape[0] - 1
        for p in range(degree, 0, -1):
            out = out * t + p * coeffs[p]
        return out

    def velocity_hat(self, t: float) -> np.ndarray:
        return self._poly_eval(self.velocity_coeffs, t)

    def velocity_rate_hat(self, t: float) -> np.ndarray:
        return self._poly_rate(self.velocity_coeffs, t)

    def stress_hat(self, t: float) -> np.ndarray:
        return self._poly_eval(self.stress_coeffs, t)

    def stress_rate_hat(self, t: float) -> np.ndarray:
        return self._poly_rate(self.stress_coeffs, t)

    def velocity_at(self, t: float) -> VelocityField:
        return VelocityField(self.grid, self.velocity_hat(t), check=False)

    def stress_at(self, t: float) -> StressField:
        return StressField(self.grid, self.stress_hat(t))


def momentum_residual(pair: TestPair, t: float, params: PhysicalParams,
                      delta: float = 1.0) -> VelocityField:
    """Residual of the filtered momentum equation at time t.

    -d/dt (filtered z) - delta P[transport of filtered z by z]
    - delta P[sum_i (filtered z)_i grad z_i] + delta P[div theta],
    Leray-projected, where z is the pair's velocity part and theta its
    stress part.  At delta = 1 a residual of zero means the pair solves
    the unforced equations exactly.
    """
    if not 0.0 <= delta <= 1.0:
        raise ContractViolation(f"delta must lie in [0, 1], got {delta}")
    grid = pair.grid
    alpha = params.alpha
    z_hat = pair.velocity_hat(t)
    z = VelocityField(grid, z_hat, check=False)
    filtered_rate = sp.helmholtz_apply(grid, pair.velocity_rate_hat(t), alpha)
    total = -filtered_rate
    if delta != 0.0:
        filtered_z = sp.helmholtz_apply(grid, z_hat, alpha)
        total = total - delta * advect(z, filtered_z)
        total = total - delta * grad_transpose(filtered_z, z)
        theta = StressField(grid, pair.stress_hat(t))
        total = total + delta * stress_divergence(theta)
    return VelocityField(grid, sp.leray_project(grid, total), check=False)


def stress_residual(pair: TestPair, t: float, params: PhysicalParams,
                    delta: float = 1.0) -> StressField:
    """Residual of the corotational stress equation at time t.

    -delta theta / lambda - d theta/dt - delta (transport + corotation)
    + 2 delta mu E(z).  Symmetric by construction.
    """
    if not 0.0 <= delta <= 1.0:
        raise ContractViolation(f"delta must lie in [0, 1], got {delta}")
    grid = pair.grid
    theta_hat = pair.stress_hat(t)
    total = -pair.stress_rate_hat(t)
    if delta != 0.0:
        z = VelocityField(grid, pair.velocity_hat(t), check=False)
        theta = StressField(grid, theta_hat)
        total = total - (delta / params.lam) * theta_hat
        total = total - delta * advect(z, theta_hat)
        total = total - delta * commutator_hat(theta, vorticity(z))
        total = total + 2.0 * delta * params.mu * strain(z).hat
    return StressField(grid, total)


def gronwall_weight(pair: TestPair, t: float, params: PhysicalParams,
                    gamma_const: float, mode: str = "maxwell") -> float:
    """Exponential weight of the dissipative inequality at time t.

    gamma * max(1, 1/alpha^2) * (|filtered z|_1 + |z|_1 + alpha^2 |z|_3)
    plus, in maxwell mode, (1 + mu) |theta|_2 / mu.  The Euler-alpha
    variant has no stress term and rejects pairs that carry one.
    """
    if gamma_const <= 0:
        raise ContractViolation(f"gamma must be positive, got {gamma_const}")
    if mode not in ("maxwell", "euler-alpha"):
        raise ContractViolation(f"unknown mode {mode!r}")
    grid = pair.grid
    alpha = params.alpha
    z_hat = pair.velocity_hat(t)
    filtered = sp.helmholtz_apply(grid, z_hat, alpha)
    total = (sp.sobolev_norm(grid, filtered, 1.0)
             + sp.sobolev_norm(grid, z_hat, 1.0)
             + alpha**2 * sp.sobolev_norm(grid, z_hat, 3.0))
    if mode == "maxwell":
        theta = StressField(grid, pair.stress_hat(t))
        theta_norm = np.sqrt(max(theta.h_norm_sq(2.0), 0.0))
        if params.mu == 0.0:
            if theta_norm > 0.0:
                raise ContractViolation(
                    "maxwell weight requires mu > 0 when the stress part is nonzero"
                )
        else:
            total += (1.0 + params.mu) * theta_norm / params.mu
    elif pair.has_stress:
        raise ContractViolation("euler-alpha mode does not admit a stress part")
    return gamma_const * max(1.0, 1.0 / alpha**2) * total


def trilinear_cancellation_defect(kappa: VelocityField, alpha: float) -> float:
    """Absolute value of the filtered-transport cancellation identity.

    |-sum_i (kappa_i * filtered kappa, d kappa / dx_i)
      + sum_i ((filtered kappa)_i grad kappa_i, kappa)|
    vanishes identically for divergence-free kappa; the returned defect
    is pure discretization noise when products are dealiased.
    """
    grid = kappa.grid
    filtered = sp.helmholtz_apply(grid, kappa.hat, alpha)
    kappa_vals = kappa.values
    term1 = 0.0
    for i in range(grid.dim):
        product = sp.dealias(grid, sp.to_spectral(grid, kappa_vals[i]
                                                  * sp.to_real(grid, filtered)))
        dk = sp.spectral_derivative(grid, kappa.hat, i)
        term1 += sp.l2_inner(grid, product, dk)
    term2 = grad_transpose(filtered, kappa)
    term2_val = sp.l2_inner(grid, term2, kappa.hat)
    return abs(-term1 + term2_val)


def transport_skew_defect(u: VelocityField, q_hat: np.ndarray,
                          weights=None) -> float:
    """|(u . grad q, q)| -- zero for divergence-free u."""
    transported = advect(u, q_hat)
    return abs(sp.l2_inner(u.grid, transported, sp.dealias(u.grid, q_hat),
                           weights))


def commutator_orthogonality_defect(sigma: StressField, w: SpinField) -> float:
    """|(sigma W - W sigma, sigma)| -- zero by pointwise symmetry."""
    comm = StressField(sigma.grid, commutator_hat(sigma, w))
    return abs(comm.l2_inner(sigma))


def identity_suite(grid: Grid, alpha: float, n_samples: int,
                   seed: int = 0) -> dict[str, float]:
    """Max normalized defects of the cancellation identities.

    Runs ``n_samples`` random divergence-free velocity / symmetric
    stress pairs and reports each identity's worst defect divided by
    its natural cubic or quadratic scale.
    """
    from .fields import random_divfree, random_stress

    worst = {"trilinear": 0.0, "transport_scalar": 0.0,
             "transport_stress": 0.0, "commutator": 0.0}
    for i in range(n_samples):
        u = random_divfree(grid, seed=seed + 7 * i, spectrum_decay=2.5)
        kappa = random_divfree(grid, seed=seed + 7 * i + 3, spectrum_decay=2.5)
        sigma = random_stress(grid, seed=seed + 7 * i + 5, spectrum_decay=2.5)
        scalar_hat = random_stress(grid, seed=seed + 7 * i + 6,
                                   spectrum_decay=2.5).hat[0]

        h1 = np.sqrt(kappa.h_norm_sq(1.0))
        defect = trilinear_cancellation_defect(kappa, alpha)
        worst["trilinear"] = max(worst["trilinear"],
                                 defect / max((1 + alpha**2) * h1**3, 1e-300))

        u_h1 = np.sqrt(u.h_norm_sq(1.0))
        q_h1_sq = sp.sobolev_norm_sq(grid, scalar_hat, 1.0)
        defect = transport_skew_defect(u, scalar_hat)
        worst["transport_scalar"] = max(worst["transport_scalar"],
                                        defect / max(u_h1 * q_h1_sq, 1e-300))

        s_h1_sq = sigma.h_norm_sq(1.0)
        defect = transport_skew_defect(u, sigma.hat, sigma.weights)
        worst["transport_stress"] = max(worst["transport_stress"],
                                        defect / max(u_h1 * s_h1_sq, 1e-300))

        defect = commutator_orthogonality_defect(sigma, vorticity(u))
        worst["commutator"] = max(worst["commutator"],
                                  defect / max(sigma.l2_norm_sq() * u_h1, 1e-300))
    return worst
