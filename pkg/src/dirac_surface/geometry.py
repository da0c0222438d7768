"""Moving frames and extrinsic curvature for surfaces immersed in 4-space.

From an immersion x(s1, s2) in E^4 this module computes, pointwise:

* an orthonormal adapted frame (two tangents from Gram-Schmidt, two
  normals from pivoted Gram-Schmidt over the ambient basis, orientation
  corrected to det +1),
* the induced metric and the mixed second-fundamental-form coefficients
  Gamma^beta_{a. alpha} = -g^{beta gamma} (n_a . d2x/ds^alpha ds^gamma),
  exact from the 2-jets of the coordinate maps,
* the normal connection (torsion) by sign-aligned central differences of
  the normal frame field with Richardson extrapolation,
* the gauge angle that rotates the normal pair so the second
  mean-curvature trace vanishes, and
* the first-order tube metric and volume density of the normal
  exponential chart, together with an independent finite-difference
  density for cross-checking.

The pivoted normal construction is canonical only up to discrete jumps
(joint sign flips, occasional pivot trades) along curves where an
ambient pivot vector grazes the tangent plane.  All stencil-based
quantities therefore align stencil frames to the center frame before
differencing; ``align_frame`` implements that resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .expr import ImmersionSpec, eval_jet2


__all__ = [
    "GeometryError",
    "DegenerateImmersionError",
    "FrameBranchError",
    "FrameData",
    "ConnectionData",
    "GaugeData",
    "TubeSample",
    "frame_at",
    "align_frame",
    "connection_at",
    "connection_from_frame",
    "gauge_at",
    "gauge_angle",
    "tube_metric_at",
]


_GS_TOL = 1e-10


class GeometryError(RuntimeError):
    """Base class for geometric failures."""


class DegenerateImmersionError(GeometryError):
    """Tangent vectors fail to span a 2-plane at the reported point."""


class FrameBranchError(GeometryError):
    """Normal frames at stencil points cannot be aligned with the center."""


@dataclass(frozen=True)
class FrameData:
    """Pointwise frame state of an immersion."""

    s: np.ndarray        # parameter point (2,)
    x: np.ndarray        # position (4,)
    e: np.ndarray        # coordinate tangents d_alpha x, rows (2, 4)
    d2x: np.ndarray      # second partials, (2, 2, 4), symmetric in (a, b)
    ehat: np.ndarray     # orthonormal tangents, rows (2, 4)
    n: np.ndarray        # orthonormal normals, rows (2, 4): n3, n4
    g: np.ndarray        # induced metric (2, 2)
    g_inv: np.ndarray    # inverse metric (2, 2)
    det_g: float

    def rotation(self) -> np.ndarray:
        """Frame matrix with columns (ehat1, ehat2, n3, n4); det = +1."""
        return np.column_stack([self.ehat[0], self.ehat[1], self.n[0], self.n[1]])


@dataclass(frozen=True)
class ConnectionData:
    """Second-fundamental-form and normal-connection coefficients.

    ``gamma_tan[adot, alpha, beta]`` is Gamma^beta_{adot alpha} with
    adot in {0, 1} standing for the normal labels {3, 4}.
    ``gamma_nor[alpha, adot, bdot]`` is Gamma^adot_{alpha bdot}.
    """

    gamma_tan: np.ndarray     # (2, 2, 2)
    gamma_nor: np.ndarray     # (2, 2, 2)
    trace3: float
    trace4: float
    frame: FrameData
    h: float
    stencil_traces: np.ndarray  # (2 alpha, 2 level, 2 side, 2 comp)

    @property
    def torsion(self) -> np.ndarray:
        """Gamma^3_{alpha 4} for alpha = 1, 2."""
        return self.gamma_nor[:, 0, 1].copy()


@dataclass(frozen=True)
class GaugeData:
    """Gauge angle zeroing the second mean-curvature trace, and hatted data.

    ``hat_torsion`` is the torsion of the gauge-fixed normal frame,
    Gamma^3_{alpha 4} + d_alpha(theta); it is invariant under smooth
    rotations of the working normal frame and is the U(1) gauge field of
    the gauged operator.
    """

    theta: float
    hat_trace3: float
    hat_trace4: float
    hat_torsion: np.ndarray   # (2,)
    dtheta: np.ndarray        # (2,) gradient of the gauge angle field
    degenerate: bool


@dataclass(frozen=True)
class TubeSample:
    """Metric and density of the normal tube chart at offset q."""

    q: np.ndarray
    g_tube: np.ndarray
    rho: float            # the finite-difference (exact-map) density
    rho_leading: float    # (1 + trace_a q^a)^2
    rho_exact: float      # same as rho


# ---------------------------------------------------------------------------
# Frames
# ---------------------------------------------------------------------------


def _project_out(v, basis):
    # two projection passes: classical Gram-Schmidt loses orthogonality
    # when the residual is small, one reorthogonalization restores it
    r = v.astype(float).copy()
    for _ in range(2):
        for b in basis:
            r -= (r @ b) * b
    return r


def frame_at(spec: ImmersionSpec, s) -> FrameData:
    """Compute position, jets, orthonormal frame and induced metric at s."""
    s = np.asarray(s, dtype=float)
    jets = [eval_jet2(expr, s) for expr in spec.coord_exprs]
    x = np.array([j.value for j in jets])
    e = np.array([[j.grad[a] for j in jets] for a in range(2)])
    d2x = np.empty((2, 2, 4))
    for i, j in enumerate(jets):
        h11, h12, h22 = j.hess
        d2x[0, 0, i] = h11
        d2x[0, 1, i] = h12
        d2x[1, 0, i] = h12
        d2x[1, 1, i] = h22

    scale = max(np.linalg.norm(e[0]), np.linalg.norm(e[1]), 1e-30)
    n1 = np.linalg.norm(e[0])
    if n1 <= _GS_TOL * scale:
        raise DegenerateImmersionError(
            f"tangent d1 x vanishes at s = {tuple(s)}"
        )
    ehat1 = e[0] / n1
    r = _project_out(e[1], [ehat1])
    n2 = np.linalg.norm(r)
    if n2 <= _GS_TOL * scale:
        raise DegenerateImmersionError(
            f"tangents are linearly dependent at s = {tuple(s)} "
            f"(Gram residual {n2:.3e})"
        )
    ehat2 = r / n2
    ehat = np.vstack([ehat1, ehat2])

    normals = []
    built = [ehat1, ehat2]
    for i in range(4):
        cand = _project_out(np.eye(4)[i], built)
        nn = np.linalg.norm(cand)
        if nn > _GS_TOL:
            cand = cand / nn
            normals.append(cand)
            built.append(cand)
            if len(normals) == 2:
                break
    n = np.vstack(normals)
    R = np.column_stack([ehat[0], ehat[1], n[0], n[1]])
    if np.linalg.det(R) < 0.0:
        n = np.vstack([n[0], -n[1]])

    theta = spec.rotation_angle(s)
    if theta != 0.0:
        c, si = math.cos(theta), math.sin(theta)
        n = np.vstack([c * n[0] - si * n[1], si * n[0] + c * n[1]])

    g = e @ e.T
    det_g = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
    g_inv = np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]]) / det_g
    return FrameData(
        s=s, x=x, e=e, d2x=d2x, ehat=ehat, n=n, g=g, g_inv=g_inv, det_g=det_g
    )


_ALIGN_CANDIDATES = (
    lambda n3, n4: (n3, n4),
    lambda n3, n4: (-n3, -n4),
    lambda n3, n4: (n4, -n3),
    lambda n3, n4: (-n4, n3),
)


def align_frame(frame: FrameData, ref: FrameData, limit: float = 0.5) -> FrameData:
    """Resolve the discrete normal-frame ambiguity against a reference.

    The pivoted construction is unique up to joint sign flips and
    quarter-turn pivot trades of the normal pair (the four candidates all
    preserve orientation).  The candidate nearest to ``ref`` is selected;
    if every candidate still differs from the reference by more than
    ``limit`` in some component, the frame field has a genuine branch
    jump between the two points and ``FrameBranchError`` is raised.
    """
    best = None
    best_dev = np.inf
    for cand in _ALIGN_CANDIDATES:
        n3, n4 = cand(frame.n[0], frame.n[1])
        dev = max(np.max(np.abs(n3 - ref.n[0])), np.max(np.abs(n4 - ref.n[1])))
        if dev < best_dev:
            best_dev = dev
            best = (n3, n4)
    if best_dev > limit:
        raise FrameBranchError(
            f"normal frame at s = {tuple(frame.s)} differs from the "
            f"reference by {best_dev:.3f} after sign alignment"
        )
    if best[0] is frame.n[0]:
        return frame
    return replace(frame, n=np.vstack(best))


# ---------------------------------------------------------------------------
# Connection coefficients
# ---------------------------------------------------------------------------


def _mixed_coefficients(frame: FrameData) -> np.ndarray:
    """Gamma^beta_{adot alpha} = -g^{beta gamma} (n_adot . d2x[alpha, gamma])."""
    nd2 = np.einsum("ni,abi->nab", frame.n, frame.d2x)
    return -np.einsum("bg,nag->nab", frame.g_inv, nd2)


def _traces(frame: FrameData) -> tuple:
    gt = _mixed_coefficients(frame)
    return float(np.trace(gt[0])), float(np.trace(gt[1]))


def connection_from_frame(
    spec: ImmersionSpec, frame: FrameData, h: float = 1e-3
) -> ConnectionData:
    """Connection data with stencil frames aligned to a given center frame."""
    s = frame.s
    gamma_tan = _mixed_coefficients(frame)
    trace3 = float(np.trace(gamma_tan[0]))
    trace4 = float(np.trace(gamma_tan[1]))

    gamma_nor = np.zeros((2, 2, 2))
    stencil_traces = np.zeros((2, 2, 2, 2))
    for alpha in range(2):
        step = np.zeros(2)
        step[alpha] = 1.0
        estimates = []
        for level, hh in enumerate((h, 0.5 * h)):
            frames = []
            for side, sign in enumerate((-1.0, 1.0)):
                fr = align_frame(frame_at(spec, s + sign * hh * step), frame)
                frames.append(fr)
                t3, t4 = _traces(fr)
                stencil_traces[alpha, level, side] = (t3, t4)
            dn = (frames[1].n - frames[0].n) / (2.0 * hh)
            estimates.append(np.einsum("ai,bi->ab", frame.n, dn))
        gamma_nor[alpha] = (4.0 * estimates[1] - estimates[0]) / 3.0

    return ConnectionData(
        gamma_tan=gamma_tan,
        gamma_nor=gamma_nor,
        trace3=trace3,
        trace4=trace4,
        frame=frame,
        h=h,
        stencil_traces=stencil_traces,
    )


def connection_at(spec: ImmersionSpec, s, h: float = 1e-3) -> ConnectionData:
    """Second-fundamental-form and torsion coefficients at a point."""
    return connection_from_frame(spec, frame_at(spec, s), h=h)


# ---------------------------------------------------------------------------
# Gauge angle
# ---------------------------------------------------------------------------


def _wrap_angle(a: float) -> float:
    return (a + math.pi) % (2.0 * math.pi) - math.pi


_GAUGE_TOL = 1e-12


def gauge_angle(frame: FrameData) -> tuple:
    """Gauge angle of a frame from its exact mean-curvature traces.

    Returns ``(theta, degenerate)``; cheaper than ``gauge_at`` when the
    hatted torsion is not needed, e.g. for stencil evaluation of the
    gauge-angle field.
    """
    t3, t4 = _traces(frame)
    if math.hypot(t3, t4) < _GAUGE_TOL:
        return 0.0, True
    return math.atan2(-t4, t3), False


def gauge_at(conn: ConnectionData) -> GaugeData:
    """Solve trace3 sin(theta) + trace4 cos(theta) = 0 and build hatted data.

    theta = atan2(-trace4, trace3), so trace3 = hat_trace3 cos(theta) and
    trace4 = -hat_trace3 sin(theta) with hat_trace3 >= 0.  The gradient of
    the gauge-angle field is measured on the same stencil used for the
    torsion (branch-unwrapped, Richardson extrapolated); at a minimal
    point (both traces zero) the constraint is vacuous and the data is
    flagged degenerate with theta = 0.
    """
    t3, t4 = conn.trace3, conn.trace4
    hat3 = math.hypot(t3, t4)
    degenerate = hat3 < _GAUGE_TOL
    theta = 0.0 if degenerate else math.atan2(-t4, t3)

    dtheta = np.zeros(2)
    if not degenerate:
        for alpha in range(2):
            estimates = []
            for level, hh in enumerate((conn.h, 0.5 * conn.h)):
                angles = []
                for side in range(2):
                    st3, st4 = conn.stencil_traces[alpha, level, side]
                    if math.hypot(st3, st4) < _GAUGE_TOL:
                        degenerate = True
                        angles.append(theta)
                    else:
                        raw = math.atan2(-st4, st3)
                        angles.append(theta + _wrap_angle(raw - theta))
                estimates.append((angles[1] - angles[0]) / (2.0 * hh))
            dtheta[alpha] = (4.0 * estimates[1] - estimates[0]) / 3.0
        if degenerate:
            dtheta[:] = 0.0

    hat_torsion = conn.torsion + dtheta
    return GaugeData(
        theta=theta,
        hat_trace3=hat3,
        hat_trace4=0.0,
        hat_torsion=hat_torsion,
        dtheta=dtheta,
        degenerate=degenerate,
    )


# ---------------------------------------------------------------------------
# Tube metric and density
# ---------------------------------------------------------------------------


def tube_metric_at(spec: ImmersionSpec, s, q, h: float = 1e-3) -> TubeSample:
    """First-order tube metric at normal offset q, with a density cross-check.

    ``g_tube`` follows the expansion of the pulled-back metric in the
    normal chart: g + [Gamma g + g Gamma] q + Gamma^T g Gamma q^2 terms.
    ``rho_leading`` is (1 + trace_a q^a)^2; ``rho_exact`` is the ratio
    det(g_num) / det(g) where g_num is the numerical first fundamental
    form of the offset map s -> x(s) + q^3 n3(s) + q^4 n4(s), central
    differenced with Richardson extrapolation and frame alignment.
    """
    q = np.asarray(q, dtype=float)
    conn = connection_at(spec, s, h=h)
    frame = conn.frame
    g = frame.g

    # qgam[alpha, beta] = sum_adot q^adot Gamma^beta_{adot alpha}
    qgam = np.einsum("n,nab->ab", q, conn.gamma_tan)
    g_tube = g + qgam @ g + g @ qgam.T + qgam @ g @ qgam.T

    t = np.array([conn.trace3, conn.trace4])
    rho_leading = float((1.0 + t @ q) ** 2)

    if not np.any(q):
        rho_exact = 1.0
    else:
        estimates = []
        for hh in (h, 0.5 * h):
            tangents = np.zeros((2, 4))
            for alpha in range(2):
                step = np.zeros(2)
                step[alpha] = hh
                f_plus = align_frame(frame_at(spec, frame.s + step), frame)
                f_minus = align_frame(frame_at(spec, frame.s - step), frame)
                p_plus = f_plus.x + q @ f_plus.n
                p_minus = f_minus.x + q @ f_minus.n
                tangents[alpha] = (p_plus - p_minus) / (2.0 * hh)
            estimates.append(tangents)
        tangents = (4.0 * estimates[1] - estimates[0]) / 3.0
        g_num = tangents @ tangents.T
        rho_exact = float(np.linalg.det(g_num) / frame.det_g)

    return TubeSample(
        q=q,
        g_tube=g_tube,
        rho=rho_exact,
        rho_leading=rho_leading,
        rho_exact=rho_exact,
    )
