"""
Asymptotic secret-key rates for the six-state and BB84 protocols.

Three families are compared:

  * one-way post-processing:           1 - H(q_I, q_X, q_Z, q_Y)
  * OTP-assisted two-way preprocessing: the one-way rate plus
        (P_odd / 4) * (H[q_I, q_Z] + H[q_X, q_Y]),  P_odd = 2 p_Z (1 - p_Z)
  * an optimal number of B-steps followed by one-way post-processing.

BB84 only observes p_Z and p_X, so its rates are minimized over the
unobserved alpha = q_Y in [0, min(p_Z, p_X)].

Every array helper here works on rows ordered (q_I, q_X, q_Y, q_Z) so grid
scans over alpha and sweeps over the channel run vectorized.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from django.conf import settings
from scipy import optimize

from . import infomath
from .constants import BB84_VARIANTS, MAX_PARAM, Variant, protocol_of
from .errormodel import PAULI_ORDER, PauliRates, depolarizing
from .exceptions import DegenerateChannel, NoCrossing, OutOfRange

logger = logging.getLogger(__name__)


def _setting(name, default):
    return getattr(settings, name, default)


# === DATA TYPES ===

@dataclass(frozen=True)
class AlphaMinimum:
    rate: float
    alpha: float


@dataclass(frozen=True)
class DecomposedKey:
    """Asymptotic branch lengths for n raw key bits."""
    even_bits: float
    odd0_bits: float
    odd1_bits: float
    consumed_bits: float

    @property
    def net_bits(self):
        return self.even_bits + self.odd0_bits + self.odd1_bits - self.consumed_bits


@dataclass(frozen=True)
class BStepOutcome:
    survived: PauliRates
    survival_prob: float

    @property
    def yield_factor(self):
        """Surviving pairs per input pair."""
        return self.survival_prob / 2.0


@dataclass(frozen=True)
class BStepOptimum:
    rate: float
    step_count: int
    alpha: Optional[float] = None


@dataclass(frozen=True)
class RatePoint:
    channel_param: float
    variant: str
    rate: float
    bstep_count: Optional[int] = None
    alpha_star: Optional[float] = None

    @property
    def rate_clamped(self):
        return max(0.0, self.rate)


@dataclass(frozen=True)
class RateCurve:
    variant: str
    points: tuple

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


# === ROW KERNELS ===

def _columns(rows):
    rows = np.clip(np.asarray(rows, dtype=np.float64), 0.0, None)
    return rows[..., 0], rows[..., 1], rows[..., 2], rows[..., 3]


def _oneway_rows(rows):
    return 1.0 - infomath.entropy_rows(np.clip(rows, 0.0, None))


def _proposed_rows(rows):
    q_I, q_X, q_Y, q_Z = _columns(rows)
    p_z = q_X + q_Y
    p_odd = 2.0 * p_z * (1.0 - p_z)
    bonus = (p_odd / 4.0) * (
        infomath.entropy_rows(np.stack([q_I, q_Z], axis=-1))
        + infomath.entropy_rows(np.stack([q_X, q_Y], axis=-1))
    )
    return _oneway_rows(rows) + bonus


def _bstep_rows(rows):
    q_I, q_X, q_Y, q_Z = _columns(rows)
    s = (q_I + q_Z) ** 2 + (q_X + q_Y) ** 2
    survived = np.stack(
        [q_I ** 2 + q_Z ** 2, q_X ** 2 + q_Y ** 2, 2.0 * q_X * q_Y, 2.0 * q_I * q_Z],
        axis=-1,
    )
    return survived / s[..., None], s


def _binary_entropy_rows(p):
    p = np.clip(p, 0.0, 1.0)
    return infomath.entropy_rows(np.stack([p, 1.0 - p], axis=-1))


def _family_rows(p_Z, p_X, alphas):
    a = np.asarray(alphas, dtype=np.float64)
    rows = np.stack([1.0 - p_Z - p_X + a, p_Z - a, a, p_X - a], axis=-1)
    return np.clip(rows, 0.0, None)


# === ONE-WAY AND PROPOSED RATES ===

def oneway_rate(q):
    """1 - H(q_I, q_X, q_Z, q_Y); negative past the tolerable error rate."""
    return 1.0 - infomath.entropy(q.as_array())


def proposed_net_rate(q):
    """Net rate of the OTP-assisted preprocessing (final key minus consumed pad, per raw bit)."""
    quarter_odd = q.odd_parity_rate / 4.0
    bonus = (
        infomath.weighted_term(quarter_odd, (q.q_I, q.q_Z))
        + infomath.weighted_term(quarter_odd, (q.q_X, q.q_Y))
    )
    return oneway_rate(q) + bonus


def even_block_entropy(q):
    """H[...] of the Pauli pair distribution inside even-parity blocks."""
    q_I, q_X, q_Y, q_Z = q.q_I, q.q_X, q.q_Y, q.q_Z
    return infomath.normalized_entropy((
        q_I * q_I, q_I * q_Z, q_Z * q_I, q_Z * q_Z,
        q_X * q_X, q_X * q_Y, q_Y * q_X, q_Y * q_Y,
    ))


def odd_branch_entropies(q):
    """(H[q_X, q_Y], H[q_I, q_Z]) for the x0 and x1 branches; 0 for empty tuples."""
    return (
        infomath.weighted_term(1.0, (q.q_X, q.q_Y)),
        infomath.weighted_term(1.0, (q.q_I, q.q_Z)),
    )


def proposed_net_rate_decomposed(q, n):
    """
    Branch lengths behind proposed_net_rate for n raw bits: the even-block
    key, the two odd-block keys and the pad consumed by the parity exchange.
    """
    if n < 0 or n % 2:
        raise OutOfRange(f"Raw key length must be even and non-negative, got {n}")
    p_odd = q.odd_parity_rate
    p_even = 1.0 - p_odd
    h_xy, h_iz = odd_branch_entropies(q)
    odd_share = n * p_odd / 4.0
    return DecomposedKey(
        even_bits=(n * p_even / 2.0) * (2.0 - even_block_entropy(q)),
        odd0_bits=odd_share * (1.0 - h_xy),
        odd1_bits=odd_share * (1.0 - h_iz),
        consumed_bits=(n / 2.0) * infomath.entropy((p_even, p_odd)),
    )


# === BB84: WORST CASE OVER ALPHA ===

def _check_bb84_rates(p_Z, p_X):
    for name, value in (('p_Z', p_Z), ('p_X', p_X)):
        if not 0.0 <= value <= 0.5:
            raise OutOfRange(f"BB84 needs {name} in [0, 1/2], got {value!r}")


def _alpha_grid(upper, grid_step=None):
    if upper <= 0:
        return np.zeros(1)
    grid_step = grid_step or _setting('KEYRATE_ALPHA_GRID_STEP', 1e-3)
    return np.linspace(0.0, upper, max(3, int(math.ceil(upper / grid_step)) + 1))


def minimize_over_alpha(objective, upper, grid_step=None, xatol=None):
    """
    Minimize objective(alphas) -> values over [0, upper].

    A coarse grid picks the basin (the objective is smooth but not known to
    be unimodal); bounded Brent refines inside the neighbouring grid cells.
    """
    if upper <= 0:
        return AlphaMinimum(float(objective(np.zeros(1))[0]), 0.0)
    xatol = xatol or _setting('KEYRATE_ALPHA_XATOL', 1e-9)

    grid = _alpha_grid(upper, grid_step)
    points = len(grid)
    values = objective(grid)
    i = int(np.argmin(values))
    best = AlphaMinimum(float(values[i]), float(grid[i]))

    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, points - 1)]
    refined = optimize.minimize_scalar(
        lambda a: float(objective(np.array([a]))[0]),
        bounds=(lo, hi),
        method='bounded',
        options={'xatol': xatol},
    )
    if refined.fun < best.rate:
        best = AlphaMinimum(float(refined.fun), float(refined.x))
    return best


def bb84_oneway_rate(p_Z, p_X):
    _check_bb84_rates(p_Z, p_X)
    return 1.0 - infomath.binary_entropy(p_Z) - infomath.binary_entropy(p_X)


def bb84_min_oneway_rate(p_Z, p_X):
    """min over alpha of the one-way rate; equals bb84_oneway_rate."""
    _check_bb84_rates(p_Z, p_X)
    return minimize_over_alpha(
        lambda a: _oneway_rows(_family_rows(p_Z, p_X, a)),
        min(p_Z, p_X),
    )


def bb84_proposed_net_rate(p_Z, p_X):
    """Worst-case (over alpha) net rate of the OTP-assisted preprocessing, with its argmin."""
    _check_bb84_rates(p_Z, p_X)
    return minimize_over_alpha(
        lambda a: _proposed_rows(_family_rows(p_Z, p_X, a)),
        min(p_Z, p_X),
    )


# === B-STEPS ===

_FLAGS = {'I': (0, 0), 'X': (1, 0), 'Y': (1, 1), 'Z': (0, 1)}
_LABELS = {flags: label for label, flags in _FLAGS.items()}


def bstep(q):
    """
    One B-step: pairs are kept when their bit-error flags agree; the kept
    pair carries the common bit flag and the XOR of the phase flags.
    """
    rows = q.as_array()
    s = float((rows[0] + rows[3]) ** 2 + (rows[1] + rows[2]) ** 2)
    if s <= 0:
        raise DegenerateChannel(f"No pair survives a B-step on {q}")
    survived, _ = _bstep_rows(rows)
    return BStepOutcome(PauliRates.from_array(survived), s)


def bstep_by_enumeration(q):
    """Brute-force B-step over all 16 ordered Pauli pairs."""
    weight = dict(zip(PAULI_ORDER, q.as_array()))
    kept = dict.fromkeys(PAULI_ORDER, 0.0)
    for first, second in itertools.product(PAULI_ORDER, repeat=2):
        bit1, phase1 = _FLAGS[first]
        bit2, phase2 = _FLAGS[second]
        if bit1 != bit2:
            continue
        kept[_LABELS[(bit1, phase1 ^ phase2)]] += weight[first] * weight[second]
    s = sum(kept.values())
    if s <= 0:
        raise DegenerateChannel(f"No pair survives a B-step on {q}")
    return BStepOutcome(PauliRates.from_array([kept[label] / s for label in PAULI_ORDER]), s)


def bstep_iterates(q, steps):
    """[(cumulative yield, channel)] after 0..steps B-steps."""
    out = [(1.0, q)]
    scale, current = 1.0, q
    for _ in range(steps):
        outcome = bstep(current)
        scale *= outcome.yield_factor
        current = outcome.survived
        out.append((scale, current))
    return out


def _max_steps(max_steps):
    max_steps = _setting('KEYRATE_MAX_BSTEPS', 20) if max_steps is None else max_steps
    if max_steps < 0:
        raise OutOfRange(f"max_steps must be >= 0, got {max_steps}")
    return max_steps


def bstep_optimal_rate(q, max_steps=None):
    """Best of k = 0..max_steps B-steps followed by one-way post-processing."""
    best = None
    for k, (scale, current) in enumerate(bstep_iterates(q, _max_steps(max_steps))):
        rate = scale * oneway_rate(current)
        if best is None or rate > best.rate:
            best = BStepOptimum(rate, k)
    return best


def _bb84_inner_rows(p_Z, p_X, alphas, steps):
    rows = _family_rows(p_Z, p_X, alphas)
    for _ in range(steps):
        rows, _ = _bstep_rows(rows)
    p_z = rows[..., 1] + rows[..., 2]
    p_x = rows[..., 3] + rows[..., 2]
    return 1.0 - _binary_entropy_rows(p_z) - _binary_entropy_rows(p_x)


def _bb84_yields(p_Z, steps):
    """Cumulative B-step yields for k = 0..steps; they only depend on p_Z."""
    yields = [1.0]
    p = p_Z
    for _ in range(steps):
        s = (1.0 - p) ** 2 + p ** 2
        yields.append(yields[-1] * s / 2.0)
        p = p * p / s
    return yields


def bb84_bstep_rate_at(p_Z, p_X, steps):
    """
    (cumulative yield, worst-case inner one-way rate) after `steps` B-steps.

    The inner rate is minimized over the initial alpha: the B-step mixes the
    unobserved q_Y into the phase error rate of the survivors.
    """
    _check_bb84_rates(p_Z, p_X)
    scale = _bb84_yields(p_Z, steps)[-1]
    if steps == 0:
        return scale, AlphaMinimum(bb84_oneway_rate(p_Z, p_X), 0.0)
    inner = minimize_over_alpha(
        lambda a: _bb84_inner_rows(p_Z, p_X, a, steps),
        min(p_Z, p_X),
    )
    return scale, inner


def bb84_bstep_optimal_rate(p_Z, p_X, max_steps=None):
    """BB84 counterpart of bstep_optimal_rate under the worst-case alpha convention."""
    _check_bb84_rates(p_Z, p_X)
    yields = _bb84_yields(p_Z, _max_steps(max_steps))
    grid = _alpha_grid(min(p_Z, p_X))
    coarse = [
        (scale * float(np.min(_bb84_inner_rows(p_Z, p_X, grid, k))), k)
        for k, scale in enumerate(yields)
    ]

    # A grid minimum bounds its refined minimum from above, so refinement can
    # stop once no coarse value beats the best refined rate.
    best = None
    for bound, k in sorted(coarse, key=lambda c: (-c[0], c[1])):
        if best is not None and bound < best.rate:
            break
        scale, inner = bb84_bstep_rate_at(p_Z, p_X, k)
        rate = scale * inner.rate
        if best is None or rate > best.rate or (rate == best.rate and k < best.step_count):
            best = BStepOptimum(rate, k, inner.alpha if k else None)
    return best


# === CURVES AND CROSSINGS ===

def _check_param(variant, param):
    upper = MAX_PARAM[protocol_of(variant)]
    if not 0.0 <= param <= upper + 1e-12:
        raise OutOfRange(f"{variant} needs a bit-error rate in [0, {upper:.4f}], got {param!r}")
    return min(param, upper)


def evaluate(variant, param, max_steps=None):
    """
    Rate of `variant` at bit-error rate `param`: the depolarizing channel with
    p = param / 2 for six-state, p_Z = p_X = param for BB84.
    """
    param = _check_param(variant, param)
    if variant in BB84_VARIANTS:
        if variant == Variant.BB84_ONE_WAY:
            return RatePoint(param, variant, bb84_oneway_rate(param, param))
        if variant == Variant.BB84_PROPOSED:
            worst = bb84_proposed_net_rate(param, param)
            return RatePoint(param, variant, worst.rate, alpha_star=worst.alpha)
        best = bb84_bstep_optimal_rate(param, param, max_steps)
        return RatePoint(param, variant, best.rate, bstep_count=best.step_count, alpha_star=best.alpha)

    q = depolarizing(param / 2.0)
    if variant == Variant.SIX_STATE_ONE_WAY:
        return RatePoint(param, variant, oneway_rate(q))
    if variant == Variant.SIX_STATE_PROPOSED:
        return RatePoint(param, variant, proposed_net_rate(q))
    if variant == Variant.SIX_STATE_BSTEP_OPT:
        best = bstep_optimal_rate(q, max_steps)
        return RatePoint(param, variant, best.rate, bstep_count=best.step_count)
    raise ValueError(f"Unknown variant {variant!r}")


def rate_curve(variant, param_start, param_end, steps, max_steps=None):
    """Evenly spaced sweep of `variant` from param_start to param_end inclusive."""
    if not 0.0 <= param_start < param_end:
        raise OutOfRange(f"Need 0 <= start < end, got [{param_start}, {param_end}]")
    if steps < 2:
        raise OutOfRange(f"A curve needs at least 2 points, got {steps}")
    _check_param(variant, param_end)
    points = tuple(
        evaluate(variant, float(x), max_steps)
        for x in np.linspace(param_start, param_end, steps)
    )
    logger.info(f"Computed {variant} curve: {steps} points on [{param_start}, {param_end}]")
    return RateCurve(variant, points)


def find_crossing(variant, param_start=0.0, param_end=None, scan_points=None, xtol=None, max_steps=None):
    """
    First bit-error rate where the raw (unclamped) rate of `variant` reaches 0,
    located by a scan for a sign change and bisection inside it.
    """
    if param_end is None:
        param_end = MAX_PARAM[protocol_of(variant)]
    scan_points = scan_points or _setting('KEYRATE_CROSSING_SCAN_POINTS', 2000)
    xtol = xtol or _setting('KEYRATE_CROSSING_XTOL', 1e-7)

    def rate_at(x):
        return evaluate(variant, float(x), max_steps).rate

    grid = np.linspace(param_start, param_end, scan_points)
    previous_x, previous = grid[0], rate_at(grid[0])
    for x in grid[1:]:
        current = rate_at(x)
        if current == 0.0:
            return float(x)
        if previous > 0.0 > current:
            crossing = optimize.bisect(rate_at, previous_x, x, xtol=xtol)
            logger.info(f"{variant} crosses zero at {crossing:.7f}")
            return float(crossing)
        previous_x, previous = x, current
    raise NoCrossing(f"{variant} does not change sign on [{param_start}, {param_end}]")
