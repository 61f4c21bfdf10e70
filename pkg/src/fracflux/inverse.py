"""Identification layer: residue checks on the branch-cut jump and least-squares
reconstruction of sources and initial states from boundary-flux data.

The residue checks verify numerically the identities behind the uniqueness
arguments: the contour integral of the branch function Q(0, .) around an
upper-ray pole equals a closed-form combination of the entire components
evaluated at the pole's 1/alpha power.  Reconstruction is honest finite
dimensional least squares: the forward flux map is linear in the unknown
coefficients, so columns are unit-coefficient flux responses and the normal
equations are solved through an SVD with an optional Tikhonov shift.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .forward import FluxTrace, SourceSpec, _conv_truncated, _E, _q_values, _roots_coalesced
from .laplace import JumpContext, q_branch
from .modes import ModelParams, ModeTable, SpectralField, check_separation
from .specfun import DomainError

__all__ = [
    "GeometryError",
    "SeparationError",
    "ResidueReport",
    "Ip2ResidueResult",
    "ReconstructionResult",
    "residue_ip1",
    "residue_ip2",
    "lsq_reconstruct",
    "conditioning_probe",
    "ConditioningRow",
]


class GeometryError(ValueError):
    """Contour circle would touch a neighboring pole, a pole ray, or the cut."""


class SeparationError(ValueError):
    """Cross-mode root separation fails, so per-mode extraction is ill-posed."""


@dataclass(frozen=True)
class ResidueReport:
    """Contour residue vs closed-form limit at one pole of the jump series."""

    mode: int
    pole: complex
    contour_value: complex
    closed_form: complex
    rel_error: float
    order: int = 1  # 2 marks the second contour moment at a double pole

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode,
            "pole": [self.pole.real, self.pole.imag],
            "contour_value": [self.contour_value.real, self.contour_value.imag],
            "closed_form": [self.closed_form.real, self.closed_form.imag],
            "rel_error": self.rel_error,
            "order": self.order,
        }


def _pole_gap(ctx: JumpContext, n: int, which: str) -> float:
    """Smallest distance from the chosen pole to any other singular structure.

    Considered: the other poles on the same ray, the mirrored lower ray, the
    branch cut of z^(1/alpha) on the negative real axis, and the origin.
    """
    from .forward import ROOT_COALESCENCE_RTOL

    radii = []
    for k in range(1, ctx.K + 1):
        radii.extend(ctx.pole_radii(k))
    target = dict(zip(("breve", "hat"), ctx.pole_radii(n)))
    r0 = target.get(which, ctx.pole_radii(n)[0])
    # a near-coalescent partner root counts as the same pole (the circle must
    # enclose it), not as a neighbor to stay away from
    same = 2.0 * ROOT_COALESCENCE_RTOL * max(r0, 1.0)
    gaps = [abs(r - r0) for r in radii if abs(r - r0) > same]
    alpha = ctx.alpha
    # distance to the mirrored ray Arg z = -pi(1-alpha) and to the cut Arg z = pi
    for raw in (2.0 * math.pi * (1.0 - alpha), math.pi * alpha):
        dtheta = min(raw, 2.0 * math.pi - raw)
        gaps.append(r0 * math.sin(dtheta) if dtheta < math.pi / 2 else r0)
    gaps.append(r0)  # origin
    return min(gaps)


def _safe_radius(ctx: JumpContext, r0: float, gap: float) -> float:
    """Circle radius: well inside the pole gap, and small enough that the image
    of the circle under z -> z^(1/alpha) swings by O(1) only.

    The entire components grow like exp(Re z^(1/alpha)); letting that factor
    vary around the circle turns rounding error in the branch-series
    evaluations into the dominant residue error, and the rounding floor of the
    moment itself also scales linearly with the radius.  |d(z^(1/a))/dz| =
    r0^(1/a-1)/a at the pole, so the cap below keeps the swing near 1/2.
    """
    return min(0.4 * gap, 0.5 * ctx.alpha * r0 ** ((ctx.alpha - 1.0) / ctx.alpha))


def _contour_moment(ctx: JumpContext, center: complex, radius: float, nodes: int, order: int) -> complex:
    """(1/2 pi i) contour integral of (z - center)^(order-1) Q(0, z) on a circle."""
    theta = 2.0 * math.pi * np.arange(nodes) / nodes
    total = 0.0 + 0.0j
    for th in theta:
        e = cmath.exp(1j * th)
        z = center + radius * e
        total += q_branch(ctx, 0, z) * (radius * e) ** (order - 1) * radius * e
    return total / nodes


def residue_ip1(ctx: JumpContext, n: int, nodes: int = 64, radius: float | None = None) -> ResidueReport:
    """Contour residue of Q(0, .) at the mode-n pole vs its closed form (a = 0 family).

    The closed form is e^(-i pi alpha) G_{n,1}(z_n^(1/alpha)) + z_n G_{n,2}(z_n^(1/alpha)).
    Other modes contribute no residue at z_n because the eigenvalues are simple.
    """
    if ctx.problem != "ip1":
        raise ValueError("residue_ip1 needs an ip1 context (a = 0)")
    if not (1 <= n <= ctx.K):
        raise ValueError(f"mode {n} outside 1..{ctx.K}")
    gap = _pole_gap(ctx, n, "breve")
    rad = _safe_radius(ctx, ctx.pole_radii(n)[0], gap) if radius is None else float(radius)
    if rad >= 0.99 * gap or rad <= 0:
        raise GeometryError(
            f"circle radius {rad:.6g} unsafe; poles/rays within {gap:.6g}, "
            f"suggested {_safe_radius(ctx, ctx.pole_radii(n)[0], gap):.6g}"
        )
    pole = ctx.pole(n)
    contour = _contour_moment(ctx, pole, rad, nodes, order=1)
    w = pole ** (1.0 / ctx.alpha)
    closed = cmath.exp(-1j * math.pi * ctx.alpha) * ctx.g_eval(n, 1, w) + pole * ctx.g_eval(n, 2, w)
    rel = abs(contour - closed) / max(abs(closed), 1e-30)
    return ResidueReport(mode=n, pole=pole, contour_value=contour, closed_form=closed, rel_error=rel)


@dataclass(frozen=True)
class Ip2ResidueResult:
    """Residues at the two mode-n poles plus the extracted pair of scalar relations.

    ``relation_violation`` is the maximum mismatch between each relation value
    recovered from its contour residue and the same expression evaluated
    directly from the stored coefficients; it vanishes for consistent data.
    ``system_matrix`` is the 2x2 extraction system for (phi_n, psi_n)-type
    pairs, with determinant a (lam_breve - lam_hat) up to sign.
    """

    report_breve: ResidueReport
    report_hat: ResidueReport | None
    relation_violation: float
    system_matrix: np.ndarray
    system_determinant: float
    coalescent: bool

    def to_json_dict(self) -> dict:
        return {
            "report_breve": self.report_breve.to_json_dict(),
            "report_hat": None if self.report_hat is None else self.report_hat.to_json_dict(),
            "relation_violation": self.relation_violation,
            "system_matrix": [[v.real for v in row] for row in np.asarray(self.system_matrix)],
            "system_determinant": self.system_determinant,
            "coalescent": self.coalescent,
        }


def _relation_direct(ctx: JumpContext, n: int, root: float, w: complex) -> complex:
    """(vkap lam_n + d - root)(G1 - root G2)(w) - a (G3 - root G4)(w), from coefficients."""
    p = ctx.params
    lam = ctx.table.lam[n - 1]
    pref = p.varkappa * lam + p.d - root
    return pref * (ctx.g_eval(n, 1, w) - root * ctx.g_eval(n, 2, w)) - p.a * (
        ctx.g_eval(n, 3, w) - root * ctx.g_eval(n, 4, w)
    )


def residue_ip2(ctx: JumpContext, n: int, nodes: int = 64) -> Ip2ResidueResult:
    """Residues at both mode-n poles of the coupled jump series with extraction checks.

    Distinct roots give two simple poles whose residues encode the two scalar
    relations; coalescent roots give one double pole handled through the second
    contour moment.  Refuses when the cross-mode separation condition fails.
    """
    if ctx.problem != "ip2":
        raise ValueError("residue_ip2 needs an ip2 context (a != 0)")
    sep = check_separation(ctx.table)
    if sep.applicable and sep.violations:
        k, m, kind = sep.violations[0]
        raise SeparationError(f"root separation fails for modes ({k}, {m}): {kind}")
    if not (1 <= n <= ctx.K):
        raise ValueError(f"mode {n} outside 1..{ctx.K}")

    p = ctx.params
    lam = ctx.table.lam[n - 1]
    lb = float(ctx.table.lam_breve[n - 1])
    lh = float(ctx.table.lam_hat[n - 1])
    epa = cmath.exp(-1j * math.pi * ctx.alpha)
    system = np.array(
        [[p.varkappa * lam + p.d - lb, -p.a], [p.varkappa * lam + p.d - lh, -p.a]], dtype=float
    )
    det = float(np.linalg.det(system))

    if _roots_coalesced(lb, lh):
        gap = _pole_gap(ctx, n, "breve")
        # the circle must enclose both nearly-merged poles
        rad = max(_safe_radius(ctx, lb, gap), 10.0 * abs(lb - lh))
        if rad >= 0.99 * gap:
            raise GeometryError(f"cannot separate the merged pole pair from neighbors (gap {gap:.3g})")
        pole = ctx.pole(n, "breve")
        w = pole ** (1.0 / ctx.alpha)
        second = _contour_moment(ctx, pole, rad, nodes, order=2)
        closed = epa**2 * _relation_direct(ctx, n, lb, w)
        rel = abs(second - closed) / max(abs(closed), 1e-30)
        rep = ResidueReport(mode=n, pole=pole, contour_value=second, closed_form=closed, rel_error=rel, order=2)
        return Ip2ResidueResult(
            report_breve=rep,
            report_hat=None,
            relation_violation=rel,
            system_matrix=system,
            system_determinant=det,
            coalescent=True,
        )

    reports = []
    extracted = []
    direct = []
    for root, other, which in ((lb, lh, "breve"), (lh, lb, "hat")):
        gap = _pole_gap(ctx, n, which)
        rad = _safe_radius(ctx, root, gap)
        pole = ctx.pole(n, which)
        w = pole ** (1.0 / ctx.alpha)
        contour = _contour_moment(ctx, pole, rad, nodes, order=1)
        rel_direct = _relation_direct(ctx, n, root, w)
        closed = epa * rel_direct / (other - root)
        rel = abs(contour - closed) / max(abs(closed), 1e-30)
        reports.append(
            ResidueReport(mode=n, pole=pole, contour_value=contour, closed_form=closed, rel_error=rel)
        )
        extracted.append(contour * (other - root) / epa)
        direct.append(rel_direct)
    scale = max(max(abs(v) for v in direct), 1e-30)
    violation = max(abs(e - d) for e, d in zip(extracted, direct)) / scale
    return Ip2ResidueResult(
        report_breve=reports[0],
        report_hat=reports[1],
        relation_violation=violation,
        system_matrix=system,
        system_determinant=det,
        coalescent=False,
    )


# ---------------------------------------------------------------------------
# least-squares reconstruction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReconstructionResult:
    """Least-squares estimate of the unknowns with misfit and conditioning data."""

    phi_hat: SpectralField
    psi_hat: SpectralField
    f_hat: SourceSpec
    chi_hat: SourceSpec
    residual_norm: float
    condition_number: float
    regularization: float
    singular_values: np.ndarray = field(repr=False)

    def to_json_dict(self) -> dict:
        def cvec(a):
            return [[v.real, v.imag] for v in np.asarray(a).ravel()]

        return {
            "phi_hat": cvec(self.phi_hat.coeffs),
            "psi_hat": cvec(self.psi_hat.coeffs),
            "f_hat": [cvec(row) for row in self.f_hat.f_coeffs],
            "chi_hat": [cvec(row) for row in self.chi_hat.chi_coeffs],
            "residual_norm": self.residual_norm,
            "condition_number": self.condition_number,
            "regularization": self.regularization,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def _flux_columns(params: ModelParams, table: ModeTable, degree: int, t: np.ndarray, which: str):
    """Unit-coefficient flux responses; per-mode kernels are computed once and shared.

    Columns come in per-mode blocks: f_(k,0..M), phi_k and, for the coupled
    problem, chi_(k,0..M), psi_k.
    """
    a = params.alpha
    tv = t.astype(complex)
    cut = tv.real > params.t0
    cols = []
    for k in range(1, table.K + 1):
        j = k - 1
        lb, lh = float(table.lam_breve[j]), float(table.lam_hat[j])
        th = float(table.theta[j])
        gk = table.gamma_trace[j]
        coalesced = _roots_coalesced(lb, lh)
        ce = {}
        cw = {}
        for m in range(degree + 1):
            ce[m] = _conv_truncated(a, lb, 1.0, m, tv, params.t0, cut)
            if coalesced:
                cw[m] = _conv_truncated(a, lb, 2.0, m, tv, params.t0, cut)
            else:
                cw[m] = (_conv_truncated(a, lh, 1.0, m, tv, params.t0, cut) - ce[m]) / (lb - lh)
        for m in range(degree + 1):
            cols.append(gk * (ce[m] + th * cw[m]))  # unit f_{k,m}
        E1 = _E(a, 1.0, 1.0, lb, tv)
        q = _q_values(params, lb, lh, tv)
        cols.append(gk * (E1 + th * q))  # unit phi_k
        if which == "ip2":
            for m in range(degree + 1):
                cols.append(gk * (-params.a) * cw[m])  # unit chi_{k,m}
            cols.append(gk * (-params.a) * q)  # unit psi_k
    return cols


def _unknowns_per_mode(degree: int, which: str) -> int:
    """Length of one per-mode block in the column order of _flux_columns."""
    return (degree + 1) + 1 if which == "ip1" else 2 * (degree + 1) + 2


def _legendre_to_monomial(t0: float, degree: int) -> np.ndarray:
    """T with monomial_coeffs = T @ legendre_coeffs, shifted Legendre on (0, t0)."""
    T = np.zeros((degree + 1, degree + 1))
    for j in range(degree + 1):
        c = np.zeros(j + 1)
        c[j] = 1.0
        leg = np.polynomial.legendre.Legendre(c, domain=[0.0, t0])
        T[: j + 1, j] = leg.convert(kind=np.polynomial.Polynomial).coef
    return T


def _precondition_blocks(t0: float, degree: int, K: int, which: str) -> np.ndarray:
    """Block-diagonal right preconditioner: orthogonal source basis per mode.

    Monomials on (0, t0) are themselves badly conditioned; re-expressing each
    source block in shifted Legendre polynomials strips that part of the
    conditioning without changing the least-squares solution in exact
    arithmetic.  Initial-state columns are left untouched.
    """
    per = _unknowns_per_mode(degree, which)
    T = _legendre_to_monomial(t0, degree)
    B = np.eye(per * K, dtype=complex)
    for k in range(K):
        o = k * per
        B[o : o + degree + 1, o : o + degree + 1] = T
        if which == "ip2":
            B[o + degree + 2 : o + 2 * degree + 3, o + degree + 2 : o + 2 * degree + 3] = T
    return B


def lsq_reconstruct(
    data: FluxTrace,
    params: ModelParams,
    table: ModeTable,
    degree: int,
    mu: float = 0.0,
    which: Literal["ip1", "ip2"] = "ip1",
) -> ReconstructionResult:
    """Tikhonov-regularized least squares for (f, phi) or (f, chi, phi, psi).

    The design matrix is the linear flux map, one column per unit coefficient.
    With mu > 0 the SVD filter x = V diag(s / (s^2 + mu)) U^H b acts on the raw
    coefficients; at mu = 0 the pseudo-inverse is computed on a preconditioned
    matrix (orthogonal source basis per mode plus column equilibration), which
    leaves the solution unchanged in exact arithmetic but avoids losing the
    well-determined directions to rounding.  The misfit norm is trapezoid
    weighted on the data grid; ``condition_number`` is the ratio of extreme
    singular values of the weighted design matrix.
    """
    if mu < 0:
        raise ValueError("regularization must be >= 0")
    if which == "ip1" and params.a != 0.0:
        raise ValueError("ip1 reconstruction requires a = 0")
    if which == "ip2":
        if params.a == 0.0:
            raise ValueError("ip2 reconstruction requires a != 0")
        sep = check_separation(table)
        if sep.applicable and sep.violations:
            k, m, kind = sep.violations[0]
            raise SeparationError(f"root separation fails for modes ({k}, {m}): {kind}")
    t = np.asarray(data.time_grid, dtype=float)
    if t.size < 2:
        raise ValueError("need at least two flux samples")
    if (t <= params.t0).any() or (t >= params.t1).any():
        raise DomainError("data grid must lie inside the observation window (t0, t1)")

    cols = _flux_columns(params, table, degree, t, which)
    A = np.column_stack(cols)
    b = np.asarray(data.values, dtype=complex)

    w = np.empty(t.size)
    w[1:-1] = 0.5 * (t[2:] - t[:-2])
    w[0] = 0.5 * (t[1] - t[0])
    w[-1] = 0.5 * (t[-1] - t[-2])
    sw = np.sqrt(w)
    Aw = A * sw[:, None]
    bw = b * sw

    s_raw = np.linalg.svd(Aw, compute_uv=False)
    cond = float(s_raw[0] / s_raw[-1]) if s_raw[-1] > 0 else math.inf
    if mu == 0.0:
        # pure pseudo-inverse: preconditioning cannot change the solution in
        # exact arithmetic, so strip the monomial-basis and column-scale parts
        # of the conditioning before factorizing
        B = _precondition_blocks(params.t0, degree, table.K, which)
        Ab = Aw @ B
        cn = np.linalg.norm(Ab, axis=0)
        cn[cn == 0] = 1.0
        U, s, Vh = np.linalg.svd(Ab / cn, full_matrices=False)
        if s[-1] <= 1e-12 * s[0]:
            import warnings

            rank = int(np.sum(s > 1e-12 * s[0]))
            warnings.warn(
                f"design matrix numerically rank deficient: rank {rank} of {s.size}", stacklevel=2
            )
        y = Vh.conj().T @ ((U.conj().T @ bw) / s)
        x = B @ (y / cn)
    else:
        # Tikhonov penalizes the documented coefficient norm, so solve in the
        # original variables
        U, s, Vh = np.linalg.svd(Aw, full_matrices=False)
        filt = s / (s**2 + mu)
        x = Vh.conj().T @ (filt * (U.conj().T @ bw))
    residual = float(np.linalg.norm(Aw @ x - bw))

    K, M = table.K, degree
    nf = K * (M + 1)
    f_hat = np.zeros((K, M + 1), dtype=complex)
    chi_hat = np.zeros((K, M + 1), dtype=complex)
    phi_hat = np.zeros(K, dtype=complex)
    psi_hat = np.zeros(K, dtype=complex)
    per = _unknowns_per_mode(M, which)
    for k in range(K):
        block = x[k * per : (k + 1) * per]
        f_hat[k] = block[: M + 1]
        phi_hat[k] = block[M + 1]
        if which == "ip2":
            chi_hat[k] = block[M + 2 : 2 * M + 3]
            psi_hat[k] = block[2 * M + 3]
    return ReconstructionResult(
        phi_hat=SpectralField(phi_hat),
        psi_hat=SpectralField(psi_hat),
        f_hat=SourceSpec(degree=M, t0=params.t0, f_coeffs=f_hat, chi_coeffs=np.zeros_like(f_hat)),
        chi_hat=SourceSpec(degree=M, t0=params.t0, f_coeffs=np.zeros_like(chi_hat), chi_coeffs=chi_hat),
        residual_norm=residual,
        condition_number=cond,
        regularization=float(mu),
        singular_values=s_raw,
    )


@dataclass(frozen=True)
class ConditioningRow:
    alpha: float
    sigma_min: float
    condition_number: float


def conditioning_probe(
    alphas,
    base_params: ModelParams,
    K: int,
    degree: int,
    data_grid,
    which: Literal["ip1", "ip2"] = "ip1",
) -> list[ConditioningRow]:
    """Smallest singular value and condition number of the design matrix per alpha.

    Exploratory output: nothing quantitative connects rational alpha to finite-K
    degeneracy; the rows just report the numbers, deterministically.
    """
    from dataclasses import replace

    t = np.asarray(data_grid, dtype=float)
    rows = []
    for a in alphas:
        params = replace(base_params, alpha=float(a))
        from .modes import build_mode_table

        table = build_mode_table(params, K)
        cols = _flux_columns(params, table, degree, t, which)
        A = np.column_stack(cols)
        w = np.empty(t.size)
        w[1:-1] = 0.5 * (t[2:] - t[:-2])
        w[0] = 0.5 * (t[1] - t[0])
        w[-1] = 0.5 * (t[-1] - t[-2])
        Aw = A * np.sqrt(w)[:, None]
        s = np.linalg.svd(Aw, compute_uv=False)
        rows.append(
            ConditioningRow(
                alpha=float(a),
                sigma_min=float(s[-1]),
                condition_number=float(s[0] / s[-1]) if s[-1] > 0 else math.inf,
            )
        )
    return rows
