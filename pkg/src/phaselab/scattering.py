"""1D scattering off a wall-plus-barrier channel, and the momentum ledger.

The setup throughout: a hard mirror at x = 0, a thin barrier at x = X > 0,
and a particle of momentum p arriving from the right.  Stationary solves
give the reflection phase of the closed channel; the bounce-chain algebra
shows the expected momentum handed to the barrier is exactly zero; the
wavepacket simulation shows the same thing in real time with an exact
discrete momentum ledger (the commutator identity of the Crank-Nicolson
step closes the books to roundoff, not to a tolerance).

Units: hbar = 1; velocities are p/m.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.sparse import diags
from scipy.sparse.linalg import splu

from . import qcore
from .errors import GeometryError, ResolutionError, StabilityError

_UNIT_R_TOL = 1e-10


@dataclass(frozen=True)
class DeltaBarrier:
    """Zero-width barrier of integrated strength gamma (energy * length)."""

    strength: float

    def __post_init__(self):
        if self.strength < 0.0:
            raise ValueError("strength must be non-negative")


@dataclass(frozen=True)
class SquareBarrier:
    """Rectangular barrier: height V0 (energy), width a (length), centered."""

    height: float
    width: float

    def __post_init__(self):
        if self.width <= 0.0:
            raise ValueError("width must be positive")


@dataclass(frozen=True)
class ScatteringConfig:
    """Channel geometry: mirror at x = 0, barrier at x = X, momentum p."""

    p: float
    m: float
    X: float
    barrier: object

    def __post_init__(self):
        if self.p <= 0.0 or self.m <= 0.0 or self.X <= 0.0:
            raise ValueError("p, m, X must all be positive")
        if isinstance(self.barrier, SquareBarrier) and self.barrier.width >= self.X:
            raise ValueError("square barrier must fit between mirror and barrier site")
        if not isinstance(self.barrier, (DeltaBarrier, SquareBarrier)):
            raise ValueError("barrier must be DeltaBarrier or SquareBarrier")

    @property
    def velocity(self) -> float:
        return self.p / self.m


def barrier_matrix(config: ScatteringConfig) -> np.ndarray:
    """Transfer matrix M with (A, B)_left = M (C, D)_right for coefficients
    of exp(+-ipx) on the two sides of the barrier.

    Delta barrier: closed form with u = m gamma / p.  Square barrier: closed
    form in cos(qa) and sin(qa)/q with q^2 = p^2 - 2 m v0, which stays regular
    through the threshold q = 0 and covers the evanescent side (q imaginary)
    automatically.  Both satisfy |r|^2 + |t|^2 = 1 for these real potentials.
    """
    p, m, X = config.p, config.m, config.X
    if isinstance(config.barrier, DeltaBarrier):
        u = m * config.barrier.strength / p
        ph = cmath.exp(2j * p * X)
        return np.array([[1 + 1j * u, 1j * u / ph],
                         [-1j * u * ph, 1 - 1j * u]], dtype=complex)
    v0, a = config.barrier.height, config.barrier.width
    q2 = p * p - 2.0 * m * v0
    q = cmath.sqrt(q2 + 0j)
    c = cmath.cos(q * a)
    s = a if q == 0 else cmath.sin(q * a) / q
    beta = (p * p + q2) / (2.0 * p)
    delta = (q2 - p * p) / (2.0 * p)
    ph = cmath.exp(2j * p * X)
    return np.array(
        [[cmath.exp(1j * p * a) * (c - 1j * beta * s), -1j * delta * s / ph],
         [1j * delta * s * ph, cmath.exp(-1j * p * a) * (c + 1j * beta * s)]],
        dtype=complex)


def transmission_probability(config: ScatteringConfig) -> float:
    """|t|^2 for a wave incident on the barrier alone (no mirror)."""
    mat = barrier_matrix(config)
    return float(1.0 / abs(mat[0, 0]) ** 2)


def reflection_phase(config: ScatteringConfig) -> float:
    """Phase of the reflection amplitude of the full mirror+barrier channel.

    The mirror closes the channel, so |r| = 1 identically; a deviation
    beyond 1e-10 means the solve is inconsistent and raises StabilityError.
    Returned angle lies in (-pi, pi].  gamma = 0 gives arg r = pi (bare
    mirror); an opaque barrier gives pi - 2pX mod 2pi, the extra phase of
    the shortened channel.
    """
    mat = barrier_matrix(config)
    denominator = mat[0, 0] + mat[1, 0]
    if abs(denominator) < 1e-300:
        raise StabilityError("channel is exactly on a resonance pole")
    r = -(mat[1, 1] + mat[0, 1]) / denominator
    if abs(abs(r) - 1.0) > _UNIT_R_TOL:
        raise StabilityError(f"|r| = {abs(r)!r} off unity in a closed channel")
    return qcore.wrap_angle(cmath.phase(r))


def naive_force_estimate(p: float, X: float, m: float, y0: float) -> float:
    """The paradoxical static estimate 2 p^2 X / (m Y0^2).

    This is the force suggested by dividing the phase gradient by the dwell
    time; it grows without bound in X, which is precisely the puzzle the
    bounce-chain accounting resolves.  Reported for narrative plots only.
    """
    if p <= 0.0 or m <= 0.0 or y0 <= 0.0:
        raise ValueError("p, m, y0 must be positive")
    if X < 0.0:
        raise ValueError("X must be non-negative")
    return 2.0 * p * p * X / (m * y0 * y0)


# ---------------------------------------------------------------------------
# Bounce chain

@dataclass(frozen=True)
class BounceChain:
    """Reflect/tunnel chain: tunneling probability epsilon per encounter."""

    epsilon: float
    p: float

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError("epsilon must lie strictly inside (0, 1)")
        if self.p <= 0.0:
            raise ValueError("p must be positive")


@dataclass(frozen=True)
class BounceExpectation:
    """Closed-form expectations; momenta counted along the incident direction."""

    net_momentum: float
    first_kick: float
    trapped_contribution: float
    trapped_dwell: float


def bounce_chain_expectation(chain: BounceChain) -> BounceExpectation:
    """Exact geometric-series expectations for the bounce chain.

    First encounter: reflect with probability 1 - eps (kick +2p toward the
    mirror) or tunnel in with probability eps.  Each inner round trip:
    escape with probability eps, else reflect with kick -2p.  The trapped
    branch therefore contributes eps * [(1-eps)/eps] * (-2p) = -2p(1-eps),
    cancelling the first kick identically: the net is written as the same
    float expression negated, so the zero is exact, not a rounding accident.
    """
    eps, p = chain.epsilon, chain.p
    first = 2.0 * p * (1.0 - eps)
    trapped = -(2.0 * p * (1.0 - eps))
    return BounceExpectation(net_momentum=first + trapped,
                             first_kick=first,
                             trapped_contribution=trapped,
                             trapped_dwell=(1.0 - eps) / eps)


@dataclass(frozen=True)
class BounceSample:
    """Monte Carlo summary of the bounce chain."""

    trials: int
    mean_net_momentum: float
    net_standard_error: float
    mean_trapped_dwell: float
    dwell_standard_error: float
    trapped_count: int


def bounce_chain_sample(chain: BounceChain, trials: int, seed: int) -> BounceSample:
    """Sample full bounce histories; deterministic for a given seed.

    Per trial the net momentum is +2p (immediate reflection) or -2p times
    the count of inner reflections before escape (geometric with success
    probability eps).  The sample mean must agree with the exact zero of
    bounce_chain_expectation within a few standard errors.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    eps, p = chain.epsilon, chain.p
    rng = np.random.default_rng(seed)
    trapped = rng.random(trials) < eps
    n_trapped = int(trapped.sum())
    nets = np.full(trials, 2.0 * p)
    dwells = np.zeros(n_trapped)
    if n_trapped:
        # geometric draw = encounters until escape; reflections are one fewer
        dwells = rng.geometric(eps, size=n_trapped) - 1.0
        nets[trapped] = -2.0 * p * dwells
    mean_net = float(nets.mean())
    se_net = float(nets.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.inf
    if n_trapped > 1:
        mean_dwell = float(dwells.mean())
        se_dwell = float(dwells.std(ddof=1) / math.sqrt(n_trapped))
    elif n_trapped == 1:
        mean_dwell, se_dwell = float(dwells[0]), math.inf
    else:
        mean_dwell, se_dwell = math.nan, math.inf
    return BounceSample(trials=trials, mean_net_momentum=mean_net,
                        net_standard_error=se_net,
                        mean_trapped_dwell=mean_dwell,
                        dwell_standard_error=se_dwell,
                        trapped_count=n_trapped)


# ---------------------------------------------------------------------------
# Wavepacket simulation

@dataclass(frozen=True)
class WavepacketRun:
    """Grid and packet for a time-dependent run.

    grid_points counts interior nodes of the Dirichlet box [0, length];
    the packet starts Gaussian at center with spatial width sigma, moving
    toward the mirror (mean momentum -p from the config).
    """

    grid_points: int
    dt: float
    length: float
    center: float
    width: float
    round_trips: int = 16

    def __post_init__(self):
        if self.grid_points < 64:
            raise ValueError("grid_points must be at least 64")
        if self.dt <= 0.0 or self.length <= 0.0:
            raise ValueError("dt and length must be positive")
        if not (0.0 < self.center < self.length):
            raise ValueError("center must lie inside the box")
        if self.width <= 0.0:
            raise ValueError("width must be positive")
        if self.round_trips < 1:
            raise ValueError("round_trips must be >= 1")


@dataclass(frozen=True)
class WavepacketResult:
    """Time series and momentum ledger of one wavepacket run.

    Momenta handed to barrier and mirror are counted along the incident
    direction of travel (toward the mirror); then the first-encounter
    barrier kick is positive, about 2p(1 - eps).  ledger_residual is the
    worst violation of (packet momentum change) + (barrier) + (walls) = 0,
    which the discrete stepper satisfies to roundoff.
    """

    times: np.ndarray
    survival: np.ndarray
    barrier_momentum: np.ndarray
    wall_momentum: np.ndarray
    packet_momentum: np.ndarray
    norm: np.ndarray
    epsilon_plane: float
    epsilon_packet: float
    first_kick: float
    first_window_end: float
    long_kick: float
    efold_roundtrips: float
    round_trip_time: float
    ledger_residual: float
    norm_drift: float


def _gaussian_packet(x: np.ndarray, center: float, width: float, p: float,
                     dx: float) -> np.ndarray:
    psi = np.exp(-((x - center) ** 2) / (4.0 * width * width) - 1j * p * x)
    return psi / math.sqrt(float(np.sum(np.abs(psi) ** 2) * dx))


def wavepacket_run(run: WavepacketRun, config: ScatteringConfig) -> WavepacketResult:
    """Crank-Nicolson evolution of a packet thrown at the mirror+barrier.

    The barrier is one grid cell of area gamma (delta) or the sampled
    square profile.  Per step, the change of <P> equals i dt <m|[H, P]|m>
    exactly for the Crank-Nicolson midpoint state m; splitting [H, P] into
    the potential part (barrier force) and the kinetic-boundary part
    (wall forces, split by half-domain) yields a momentum ledger that
    closes identically.  Survival in [0, X] is fit stroboscopically, one
    sample per round trip, to extract the trapping decay.

    Raises StabilityError on norm drift > 1e-6 and GeometryError if more
    than 1e-3 of probability reaches the far 5% of the box during the
    measurement window.
    """
    n = run.grid_points
    dx = run.length / (n + 1)
    x = dx * np.arange(1, n + 1)
    p, m, X = config.p, config.m, config.X

    if run.width < 8.0 * dx:
        raise ValueError("packet width must be well resolved (width >= 8 dx)")
    if p * dx >= 0.5:
        raise ValueError("momentum not resolved on the grid (p dx >= 0.5)")
    if run.center <= X + 5.0 * run.width:
        raise ValueError("packet must start well to the right of the barrier")
    if run.length <= run.center + 5.0 * run.width:
        raise ValueError("box must extend well beyond the packet start")

    pot = np.zeros(n)
    if isinstance(config.barrier, DeltaBarrier):
        pot[int(round(X / dx)) - 1] = config.barrier.strength / dx
    else:
        inside = np.abs(x - X) <= 0.5 * config.barrier.width
        pot[inside] = config.barrier.height

    kin = 1.0 / (2.0 * m * dx * dx)

    def apply_t(psi):
        out = -2.0 * psi.copy()
        out[:-1] += psi[1:]
        out[1:] += psi[:-1]
        return -kin * out

    def apply_p_op(psi):
        out = np.zeros_like(psi)
        out[:-1] = psi[1:]
        out[1:] -= psi[:-1]
        return -0.5j * out / dx

    def apply_h(psi):
        return apply_t(psi) + pot * psi

    # Crank-Nicolson: (I + i dt H / 2) psi_new = (I - i dt H / 2) psi_old
    half = 0.5j * run.dt
    main = 1.0 + half * (2.0 * kin + pot)
    off = np.full(n - 1, -half * kin)
    stepper = splu(diags([off, main, off], offsets=(-1, 0, 1), format="csc"))

    psi = _gaussian_packet(x, run.center, run.width, p, dx).astype(complex)

    v = config.velocity
    round_trip = 2.0 * X / v
    t_first = ((run.center - X) + 4.0 * run.width) / v
    t_end = t_first + run.round_trips * round_trip
    steps = int(math.ceil(t_end / run.dt))

    in_channel = x <= X
    left_half = x <= 0.5 * run.length
    far_zone = x >= 0.95 * run.length

    def pexp(psi):
        return float(np.vdot(psi, apply_p_op(psi)).real * dx)

    times = np.empty(steps + 1)
    survival = np.empty(steps + 1)
    barrier_mom = np.empty(steps + 1)
    wall_mom = np.empty(steps + 1)
    packet_mom = np.empty(steps + 1)
    norms = np.empty(steps + 1)

    # the incident direction is -x; ledger columns are reported along it
    axis = -1.0
    barrier_acc = 0.0
    wall_acc = 0.0
    ledger_residual = 0.0
    p_prev = pexp(psi)

    times[0] = 0.0
    survival[0] = float(np.sum(np.abs(psi[in_channel]) ** 2) * dx)
    barrier_mom[0] = 0.0
    wall_mom[0] = 0.0
    packet_mom[0] = p_prev
    norms[0] = float(np.sum(np.abs(psi) ** 2) * dx)

    for k in range(steps):
        rhs = 2.0 * psi - (main * psi + np.concatenate(
            ([0.0], off * psi[:-1])) + np.concatenate((off * psi[1:], [0.0])))
        # rhs computed as (I - i dt H/2) psi = 2 psi - (I + i dt H/2) psi
        new = stepper.solve(rhs)
        mid = 0.5 * (psi + new)

        # force on the particle from the barrier: i [V, P]
        pv = pot * apply_p_op(mid) - apply_p_op(pot * mid)
        dp_from_barrier = float((1j * np.vdot(mid, pv)).real * dx) * run.dt
        # boundary part: i [T, P], supported only at the walls
        tp = apply_t(apply_p_op(mid)) - apply_p_op(apply_t(mid))
        comm = (1j * mid.conj() * tp).real * dx
        dp_from_left = float(np.sum(comm[left_half])) * run.dt
        dp_from_right = float(np.sum(comm[~left_half])) * run.dt

        barrier_acc += axis * (-dp_from_barrier)
        wall_acc += axis * (-(dp_from_left + dp_from_right))
        psi = new
        p_now = pexp(psi)
        ledger_residual = max(ledger_residual, abs(
            (p_now - p_prev) - (dp_from_barrier + dp_from_left + dp_from_right)))
        p_prev = p_now

        times[k + 1] = (k + 1) * run.dt
        survival[k + 1] = float(np.sum(np.abs(psi[in_channel]) ** 2) * dx)
        barrier_mom[k + 1] = barrier_acc
        wall_mom[k + 1] = wall_acc
        packet_mom[k + 1] = p_now
        norms[k + 1] = float(np.sum(np.abs(psi) ** 2) * dx)
        if float(np.sum(np.abs(psi[far_zone]) ** 2) * dx) > 1e-3:
            raise GeometryError("packet reached the far wall inside the "
                                "measurement window; enlarge the box")

    norm_drift = float(np.max(np.abs(norms - norms[0])))
    if norm_drift > 1e-6:
        raise StabilityError(f"norm drift {norm_drift:.3e} exceeds 1e-6")

    eps_plane = transmission_probability(config)
    idx_first = min(int(round(t_first / run.dt)), steps)
    eps_packet = survival[idx_first]
    first_kick = barrier_mom[idx_first]
    long_kick = barrier_mom[steps]

    # stroboscopic decay fit, skipping the first post-encounter round trip
    ks = np.arange(2, run.round_trips)
    strobe = np.array([survival[min(int(round((t_first + kk * round_trip) / run.dt)),
                                    steps)] for kk in ks])
    good = strobe > 1e-12
    if good.sum() >= 3:
        slope = np.polyfit(ks[good], np.log(strobe[good]), 1)[0]
        efold = -1.0 / slope if slope < 0 else math.inf
    else:
        efold = math.nan
    return WavepacketResult(times=times, survival=survival,
                            barrier_momentum=barrier_mom,
                            wall_momentum=wall_mom,
                            packet_momentum=packet_mom, norm=norms,
                            epsilon_plane=eps_plane,
                            epsilon_packet=float(eps_packet),
                            first_kick=float(first_kick),
                            first_window_end=float(times[idx_first]),
                            long_kick=float(long_kick),
                            efold_roundtrips=float(efold),
                            round_trip_time=round_trip,
                            ledger_residual=ledger_residual,
                            norm_drift=norm_drift)


# ---------------------------------------------------------------------------
# Reflection phase versus probe distance

@dataclass(frozen=True)
class ProbeProfile:
    """Barrier strength as a function of transverse probe distance Y.

    strength_of_Y decreases from a large value at the channel edge Y = w
    to nearly zero beyond the range y0.
    """

    strength_of_y: Callable[[float], float]
    y0: float
    w: float

    def __post_init__(self):
        if not (0.0 <= self.w < self.y0):
            raise ValueError("need 0 <= w < y0")

    @classmethod
    def exponential(cls, peak: float, w: float, y0: float,
                    floor: float = 1e-3) -> "ProbeProfile":
        """gamma(Y) = peak at Y = w decaying exponentially to floor at y0."""
        if peak <= floor or floor <= 0.0:
            raise ValueError("need peak > floor > 0")
        if not (0.0 <= w < y0):
            raise ValueError("need 0 <= w < y0")
        rate = math.log(peak / floor) / (y0 - w)

        def gamma(yv: float) -> float:
            return peak * math.exp(-rate * (yv - w))

        return cls(strength_of_y=gamma, y0=y0, w=w)


@dataclass(frozen=True)
class PhaseSweep:
    """Reflection phase along a probe-distance sweep."""

    y: np.ndarray
    strength: np.ndarray
    phase: np.ndarray
    unwrapped: np.ndarray
    total_variation: float
    winding_count: int


def phase_vs_y(profile: ProbeProfile, config: ScatteringConfig,
               y_samples, max_refinements: int = 24) -> PhaseSweep:
    """Reflection phase as the probe distance varies, continuously unwrapped.

    Nearest-branch continuation between consecutive samples; midpoints are
    inserted until every jump is below pi/2, so resonance windings are
    counted rather than aliased.  Samples must lie in (w, 2 y0].
    """
    ys = sorted(float(yv) for yv in np.asarray(y_samples, dtype=float).ravel())
    if len(ys) < 2:
        raise ValueError("need at least two probe distances")
    if ys[0] <= profile.w or ys[-1] > 2.0 * profile.y0:
        raise ValueError("probe distances must lie in (w, 2 y0]")

    def phase_at(yv: float) -> float:
        cfg = ScatteringConfig(p=config.p, m=config.m, X=config.X,
                               barrier=DeltaBarrier(profile.strength_of_y(yv)))
        return reflection_phase(cfg)

    def unwrap(seq):
        out = [seq[0]]
        for ph in seq[1:]:
            out.append(ph + 2.0 * math.pi * round((out[-1] - ph) / (2.0 * math.pi)))
        return out

    def densify(yy, pp):
        oy, op = [yy[0]], [pp[0]]
        for yv, ph in zip(yy[1:], pp[1:]):
            mid = 0.5 * (oy[-1] + yv)
            oy.append(mid)
            op.append(phase_at(mid))
            oy.append(yv)
            op.append(ph)
        return oy, op

    phases = [phase_at(yv) for yv in ys]
    for _ in range(max_refinements):
        jumps = [qcore.circle_distance(a, b) for a, b in zip(phases, phases[1:])]
        if max(jumps) < 0.5 * math.pi:
            # guard against whole windings hiding between samples: a global
            # midpoint pass must leave the unwrapped variation unchanged
            span_old = unwrap(phases)[0] - unwrap(phases)[-1]
            ys, phases = densify(ys, phases)
            span_new = unwrap(phases)[0] - unwrap(phases)[-1]
            if abs(span_new - span_old) < 1e-9 * max(1.0, abs(span_old)):
                break
        else:
            new_ys, new_ph = [ys[0]], [phases[0]]
            for yv, ph, jump in zip(ys[1:], phases[1:], jumps):
                if jump >= 0.5 * math.pi:
                    mid = 0.5 * (new_ys[-1] + yv)
                    new_ys.append(mid)
                    new_ph.append(phase_at(mid))
                new_ys.append(yv)
                new_ph.append(ph)
            ys, phases = new_ys, new_ph
    else:
        raise ResolutionError("phase jumps above pi/2 persist after refinement; "
                              "profile varies too fast")

    unwrapped = np.array(unwrap(phases))
    ys = np.array(ys)
    total = float(unwrapped[0] - unwrapped[-1])
    # variation accumulated going inward (from far probe to channel edge)
    return PhaseSweep(y=ys,
                      strength=np.array([profile.strength_of_y(yv) for yv in ys]),
                      phase=np.array(phases), unwrapped=unwrapped,
                      total_variation=total,
                      winding_count=int(abs(total) // (2.0 * math.pi)))
