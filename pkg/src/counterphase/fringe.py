"""Interference-pattern synthesis by velocity and ramp-period averaging.

The observed fringe is the modulus and argument of the averaged unit phasor

    <exp{i [phi_int(v) + phi1(t) + phi2(t + L_shifters/v)]}>

taken over the beam's velocity distribution and over atom arrival times
spanning one ramp period. Two independent engines compute it: a
deterministic Gauss-Legendre quadrature (the workhorse) and a Monte Carlo
atom-counting oracle (the cross-check). A closed-form Gaussian envelope
covers the linear-dispersion limit. Detector scans with Poisson counting
noise are synthesized from the averaged observables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .constants import TWO_PI
from .errors import QuadratureError
from .phases import InterferometerGeometry, VelocityDistribution
from .waveforms import (
    IdealSawtooth,
    NullWaveform,
    RcRamp,
    Waveform,
    _common_period,
)

__all__ = [
    "FringeObservable",
    "DetectorScan",
    "McAmplitude",
    "complex_fringe_amplitude",
    "gaussian_envelope",
    "synthesize_scan",
    "monte_carlo_amplitude",
    "unwrap_to",
]

# Velocity quadrature: Gauss-Legendre over the truncated support, split
# into smooth segments when the shifter pair makes the integrand only
# piecewise-smooth (see _kink_velocities). The doubled rule must agree to
# QUAD_TOL in contrast or the average is reported as non-converged.
N_VELOCITY_NODES = 257
QUAD_TOL = 1e-6
MIN_SEGMENT_NODES = 8

# Gauss-Legendre nodes per smooth segment of the ramp period. The period
# is split at the phasor discontinuities of both waveforms (ramp resets,
# drive turn-off), so each segment is analytic and a modest fixed rule is
# accurate to near machine precision. A single uniform grid over the
# period would alias the resets and bias the contrast by ~1e-4, which the
# Monte Carlo cross-check can resolve at 1e6 atoms.
N_SEGMENT_NODES = 32

MC_BLOCKS = 50


@lru_cache(maxsize=32)
def _leggauss(n: int):
    # Node computation is O(n^2); the servo loop builds kernels at a new
    # ramp frequency every step, so these must not be recomputed.
    x, w = leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def unwrap_to(angle: float, reference: float) -> float:
    """Shift angle by the multiple of 2*pi that lands nearest reference."""
    return angle + TWO_PI * round((reference - angle) / TWO_PI)


@dataclass(frozen=True)
class FringeObservable:
    """Averaged fringe parameters driving the detector model.

    mean_rate is the velocity-averaged beam intensity N (counts/s);
    amplitude is the full fringe amplitude A (counts/s) set by grating
    quality; contrast and phase are the relative revival contrast C' and
    unwrapped fringe phase phi' from the velocity/time average. Expected
    detector rate at grating offset z is N + A*C'*cos(k_g*z + phi').
    """

    mean_rate: float
    amplitude: float
    contrast: float
    phase: float

    def __post_init__(self):
        if self.mean_rate < 0 or self.amplitude < 0:
            raise ValueError("FringeObservable: rates must be >= 0")
        if self.amplitude > self.mean_rate:
            raise ValueError(
                "FringeObservable: fringe amplitude exceeds mean intensity"
            )
        if not -1e-12 <= self.contrast <= 1.0 + 1e-12:
            raise ValueError("FringeObservable: contrast must lie in [0, 1]")


@dataclass(frozen=True)
class DetectorScan:
    """Counts versus grating offset z, one dwell interval per point."""

    z: np.ndarray
    counts: np.ndarray
    dwell: float
    seed: int | None = None

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        counts = np.asarray(self.counts)
        if z.shape != counts.shape or z.ndim != 1:
            raise ValueError("DetectorScan: z and counts must be equal-length 1-d")
        if np.any(counts < 0):
            raise ValueError("DetectorScan: counts must be >= 0")
        if self.dwell <= 0:
            raise ValueError("DetectorScan: dwell must be > 0")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "counts", counts)

    def to_csv(self, path) -> None:
        lines = [f"# dwell_s={self.dwell!r}", f"# seed={self.seed!r}", "z_m,counts"]
        for zi, ci in zip(self.z, self.counts):
            ci = int(ci) if float(ci).is_integer() else float(ci)
            lines.append(f"{float(zi)!r},{ci!r}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path) -> "DetectorScan":
        meta: dict[str, str] = {}
        z, counts = [], []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    key, _, value = line.lstrip("# ").partition("=")
                    meta[key] = value
                    continue
                if line == "z_m,counts":
                    continue
                zi, ci = line.split(",")
                z.append(float(zi))
                counts.append(float(ci))
        seed = None if meta.get("seed") in (None, "None") else int(meta["seed"])
        return cls(
            z=np.array(z),
            counts=np.array(counts),
            dwell=float(meta["dwell_s"]),
            seed=seed,
        )


def _as_pair(pair) -> tuple[Waveform, Waveform]:
    if pair is None:
        return (NullWaveform(), NullWaveform())
    w1, w2 = pair
    return (w1, w2)


def _phasor_breakpoints(w: Waveform) -> tuple[float, ...]:
    """Times in [0, T) where exp(i*phase(t)) is not smooth."""
    if isinstance(w, NullWaveform):
        return ()
    T = w.period
    if isinstance(w, IdealSawtooth):
        # A unit-scale reset wraps through exactly 2*pi: the phasor is a
        # pure tone with no discontinuity at all.
        if w.scale == 1.0:
            return ()
        return (w.t0 % T,)
    if isinstance(w, RcRamp):
        return (w.t0 % T, (w.t0 + w.p * T) % T)
    raise TypeError(f"unknown waveform type {type(w).__name__}")


def _ideal_tone_sign(w: Waveform) -> int | None:
    """sign s such that exp(i*phase(t)) = exp(i*s*2*pi*f*(t - t0)), else None."""
    if isinstance(w, IdealSawtooth) and w.scale == 1.0:
        return w.sign
    if isinstance(w, NullWaveform):
        return 0
    return None


def _pair_phasor(w1: Waveform, w2: Waveform, tau: np.ndarray) -> np.ndarray:
    """Mean over one ramp period of exp(i*(phi1(t) + phi2(t + tau))).

    Vectorized over the flight-time array tau. Pure-tone pairs (Null or
    unit-scale ideal ramps) reduce to a closed form; anything else is
    integrated by Gauss-Legendre on the smooth segments between phasor
    breakpoints.
    """
    tau = np.asarray(tau, dtype=float)
    s1, s2 = _ideal_tone_sign(w1), _ideal_tone_sign(w2)
    if s1 == 0 and s2 == 0:
        return np.ones(tau.shape, dtype=complex)
    if s1 is not None and s2 is not None:
        # exp(i*(phi1 + phi2)) = e^{i*2pi*f*((s1+s2)t + s2*tau - s1*t01 - s2*t02)}
        f = w1.f if s1 != 0 else w2.f
        if s1 + s2 != 0:
            return np.zeros(tau.shape, dtype=complex)
        t01 = getattr(w1, "t0", 0.0)
        t02 = getattr(w2, "t0", 0.0)
        return np.exp(1j * TWO_PI * f * (s2 * tau - s1 * t01 - s2 * t02))

    T = _common_period(w1, w2)
    cols = [np.full(tau.shape, b) for b in _phasor_breakpoints(w1)]
    cols += [np.mod(b - tau, T) for b in _phasor_breakpoints(w2)]
    brk = np.sort(np.stack(cols, axis=-1), axis=-1)
    starts = brk
    ends = np.concatenate([brk[..., 1:], brk[..., :1] + T], axis=-1)

    x, gw = _leggauss(N_SEGMENT_NODES)
    half = 0.5 * (ends - starts)
    mid = 0.5 * (ends + starts)
    t = mid[..., None] + half[..., None] * x
    g = np.exp(1j * (w1.phase(t) + w2.phase(t + tau[..., None, None])))
    seg = np.sum(g * gw, axis=-1) * half
    return seg.sum(axis=-1) / T


def _kink_velocities(
    w1: Waveform, w2: Waveform, dist: VelocityDistribution, l_shifters: float
) -> tuple[float, ...]:
    """Speeds where the pair phasor loses smoothness as a function of v.

    Differentiating the period average of exp(i*(phi1(t) + phi2(t + tau)))
    with respect to the flight time tau = l_shifters/v pairs each phasor
    jump of one waveform against the values of the other, so the result is
    only piecewise smooth: its derivative breaks whenever a breakpoint of
    the delayed waveform lands on a breakpoint of the first, i.e. at
    tau = (b2 - b1) mod T + m*T. A global polynomial rule stalls near
    1e-5 accuracy on such integrands, so the velocity quadrature must be
    split at these speeds.
    """
    b1s, b2s = _phasor_breakpoints(w1), _phasor_breakpoints(w2)
    if not b1s or not b2s:
        return ()
    T = _common_period(w1, w2)
    lo, hi = dist.support
    tau_lo, tau_hi = l_shifters / hi, l_shifters / lo
    out: set[float] = set()
    for b1 in b1s:
        for b2 in b2s:
            delta = (b2 - b1) % T
            m_lo = math.ceil((tau_lo - delta) / T)
            m_hi = math.floor((tau_hi - delta) / T)
            for m in range(m_lo, m_hi + 1):
                tau = delta + m * T
                if tau <= 0:
                    continue
                v = l_shifters / tau
                if lo < v < hi:
                    out.add(v)
    return tuple(sorted(out))


@lru_cache(maxsize=64)
def _velocity_kernel(
    pair: tuple[Waveform, Waveform],
    dist: VelocityDistribution,
    geom: InterferometerGeometry,
    n_nodes: int,
):
    """Velocity nodes, normalized pdf weights, and shifter-pair phasors.

    The support is split at the kink speeds of the pair phasor and each
    smooth segment gets its own Gauss-Legendre rule. The shifter-pair time
    average is the expensive factor and depends only on the pair and the
    node velocities, so it is cached across sweeps of the interaction
    strength.
    """
    lo, hi = dist.support
    w1, w2 = pair
    edges = [lo, *_kink_velocities(w1, w2, dist, geom.l_shifters), hi]
    n_seg = max(MIN_SEGMENT_NODES, -(-n_nodes // (len(edges) - 1)))
    x, gw = _leggauss(n_seg)
    v_parts, w_parts = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        half, mid = 0.5 * (b - a), 0.5 * (b + a)
        v_parts.append(mid + half * x)
        w_parts.append(half * gw)
    v = np.concatenate(v_parts)
    wv = np.concatenate(w_parts) * dist.pdf(v)
    wv = wv / wv.sum()
    pv = _pair_phasor(w1, w2, geom.l_shifters / v)
    v.setflags(write=False)
    wv.setflags(write=False)
    pv.setflags(write=False)
    return v, wv, pv


def _pair_reference_phase(pair, geom: InterferometerGeometry, v0: float) -> float:
    """First-order counter phase of the pair at v0, for unwrap referencing."""
    w1, w2 = pair
    f1 = getattr(w1, "f", None)
    f2 = getattr(w2, "f", None)
    if f1 is None or f2 is None or f1 != f2:
        return 0.0
    if w1.sign + w2.sign != 0:
        return 0.0
    return -w1.sign * TWO_PI * f1 * geom.l_shifters / v0


def complex_fringe_amplitude(
    phi_int_of_v,
    pair,
    dist: VelocityDistribution,
    geom: InterferometerGeometry,
    *,
    reference: float | None = None,
) -> tuple[float, float]:
    """Contrast C' and unwrapped phase phi' of the averaged phasor.

    Parameters
    ----------
    phi_int_of_v : callable
        Interaction phase (rad) as a function of speed (m/s); must accept
        ndarray input.
    pair : (Waveform, Waveform) or None
        The two shifter drives; None means both off.
    dist, geom :
        Beam velocity distribution and interferometer geometry.
    reference : float, optional
        Unwrap target for phi'. Defaults to the first-order prediction
        phi_int(v0) - 2*pi*f*L_shifters/v0 so single calls land on the
        physically accumulated branch; sweep drivers pass the previous
        sweep point instead.

    Raises
    ------
    QuadratureError
        If doubling the velocity nodes moves the contrast by more than
        1e-6 (oscillatory integrand underresolved).
    """
    pair = _as_pair(pair)

    def averaged(n_nodes: int) -> complex:
        v, wv, pv = _velocity_kernel(pair, dist, geom, n_nodes)
        return np.sum(wv * np.exp(1j * phi_int_of_v(v)) * pv)

    coarse = averaged(N_VELOCITY_NODES)
    fine = averaged(2 * N_VELOCITY_NODES)
    if abs(abs(fine) - abs(coarse)) > QUAD_TOL:
        raise QuadratureError(
            "velocity quadrature did not converge: doubling the nodes moved "
            f"the contrast by {abs(abs(fine) - abs(coarse)):.3e} (> {QUAD_TOL:g})"
        )
    contrast = float(abs(fine))
    if reference is None:
        reference = float(phi_int_of_v(dist.v0)) + _pair_reference_phase(
            pair, geom, dist.v0
        )
    phase = unwrap_to(float(np.angle(fine)), reference)
    return contrast, phase


def gaussian_envelope(
    phi_int_v0: float,
    sigma_ratio: float,
    f: float,
    l_shifters: float,
    v0: float,
) -> tuple[float, float]:
    """Closed-form contrast and phase in the linear-dispersion limit.

    For a 1/v interaction phase opposed by the ramp-pair counter phase,
    expanding both to first order in (v - v0) gives

        phi' = phi_int(v0) - 2*pi*f*l_shifters/v0
        C'   = exp[-(sigma_ratio * phi')^2 / 2]

    With f = 0 this is the plain dephasing envelope.
    """
    if sigma_ratio <= 0:
        raise ValueError("sigma_ratio must be > 0")
    if f != 0.0 and v0 <= 0:
        raise ValueError("v0 must be > 0 when f is nonzero")
    phase = phi_int_v0 - (TWO_PI * f * l_shifters / v0 if f != 0.0 else 0.0)
    contrast = math.exp(-0.5 * (sigma_ratio * phase) ** 2)
    return contrast, phase


def synthesize_scan(
    obs: FringeObservable,
    z,
    k_g: float,
    dwell: float,
    seed: int | None,
    *,
    noise: bool = True,
) -> DetectorScan:
    """Detector counts versus grating offset for the given fringe.

    Expected counts per point are dwell*(N + A*C'*cos(k_g*z + phi')).
    With noise=True counts are Poisson draws (fixed seed gives identical
    output); with noise=False the exact expected values are returned,
    which is the noiseless limit used by fit oracles.
    """
    z = np.asarray(z, dtype=float)
    if k_g <= 0:
        raise ValueError("k_g must be > 0")
    if dwell <= 0:
        raise ValueError("dwell must be > 0")
    mu = dwell * (
        obs.mean_rate
        + obs.amplitude * obs.contrast * np.cos(k_g * z + obs.phase)
    )
    if np.any(mu < 0):
        raise ValueError("expected counts < 0: fringe amplitude exceeds mean rate")
    if not noise:
        return DetectorScan(z=z, counts=mu, dwell=dwell, seed=None)
    if seed is None:
        raise ValueError("seed is required when noise is enabled")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    counts = rng.poisson(mu).astype(np.int64)
    return DetectorScan(z=z, counts=counts, dwell=dwell, seed=seed)


@dataclass(frozen=True)
class McAmplitude:
    """Monte Carlo fringe estimate with delete-one-block jackknife errors."""

    contrast: float
    phase: float
    contrast_se: float
    phase_se: float
    n_atoms: int


def monte_carlo_amplitude(
    phi_int_of_v,
    pair,
    dist: VelocityDistribution,
    geom: InterferometerGeometry,
    n_atoms: int,
    seed: int,
    *,
    reference: float | None = None,
) -> McAmplitude:
    """Brute-force check of complex_fringe_amplitude by atom counting.

    Samples velocities from the truncated Gaussian (rejection against the
    support) and arrival times uniformly over one ramp period, then
    averages exp(i * total phase) atom by atom. Atoms are split into
    fixed blocks, each with its own counter-based random substream, so
    the result is bit-identical for a given (n_atoms, seed) regardless of
    evaluation order. Standard errors come from a delete-one-block
    jackknife.
    """
    n_atoms = int(n_atoms)
    if n_atoms < 1e4:
        raise ValueError("n_atoms must be >= 1e4 for stable jackknife errors")
    pair = _as_pair(pair)
    w1, w2 = pair
    periodic = not (isinstance(w1, NullWaveform) and isinstance(w2, NullWaveform))
    T = _common_period(w1, w2) if periodic else 0.0
    lo, hi = dist.support

    base = n_atoms // MC_BLOCKS
    remainder = n_atoms - base * MC_BLOCKS
    sizes = np.full(MC_BLOCKS, base, dtype=np.int64)
    sizes[:remainder] += 1

    sums = np.empty(MC_BLOCKS, dtype=complex)
    for b in range(MC_BLOCKS):
        rng = np.random.Generator(
            np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(b,)))
        )
        n_b = int(sizes[b])
        v = rng.normal(dist.v0, dist.sigma_v, size=n_b)
        bad = (v < lo) | (v > hi)
        while np.any(bad):
            v[bad] = rng.normal(dist.v0, dist.sigma_v, size=int(bad.sum()))
            bad = (v < lo) | (v > hi)
        total = np.asarray(phi_int_of_v(v), dtype=float)
        if periodic:
            t = rng.uniform(0.0, T, size=n_b)
            total = total + w1.phase(t) + w2.phase(t + geom.l_shifters / v)
        sums[b] = np.exp(1j * total).sum()

    n_total = sizes.sum()
    grand = sums.sum()
    mean = grand / n_total
    contrast = float(abs(mean))
    if reference is None:
        reference = float(phi_int_of_v(dist.v0)) + _pair_reference_phase(
            pair, geom, dist.v0
        )
    phase = unwrap_to(float(np.angle(mean)), reference)

    loo = (grand - sums) / (n_total - sizes)
    loo_contrast = np.abs(loo)
    loo_phase = np.angle(loo)
    loo_phase += TWO_PI * np.round((phase - loo_phase) / TWO_PI)
    fac = (MC_BLOCKS - 1) / MC_BLOCKS
    contrast_se = math.sqrt(fac * np.sum((loo_contrast - loo_contrast.mean()) ** 2))
    phase_se = math.sqrt(fac * np.sum((loo_phase - loo_phase.mean()) ** 2))
    return McAmplitude(
        contrast=contrast,
        phase=phase,
        contrast_se=contrast_se,
        phase_se=phase_se,
        n_atoms=int(n_total),
    )
