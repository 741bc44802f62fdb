"""
Monte Carlo run of the classical post-processing over a simulated
authenticated channel.

A session samples Pauli errors for n_signals kept signals, reveals a test
set, estimates the channel and aborts when the analytic rate at the estimate
is not positive. Otherwise the raw key goes through one of two paths:

  * run_session: the OTP-assisted block-parity preprocessing. Alice sends the
    parities of the length-2 blocks masked with fresh pad bits, Bob answers
    with the parity difference, even blocks become one key and odd blocks are
    split into two more after the first bits are announced.
  * run_bstep_session: bstep_count rounds of B-steps followed by one-way
    distillation of the survivors.

Every public message is recorded in a Transcript. Keys are compressed with
Toeplitz hashes at the asymptotic branch lengths computed from the estimate.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from types import SimpleNamespace
from typing import Optional

import numpy as np
from django.conf import settings

from rates import keyrates
from rates.constants import Protocol
from rates.errormodel import (
    ObservedRates,
    PauliRates,
    bb84_worst_case_family,
    pauli_counts,
    pauli_from_observed,
    sample_errors,
    upper_error_bound,
)
from rates.infomath import binary_entropy
from reconciliation import codec

from .constants import MAX_BLOCK_SIZE, SEED_BITS, STREAM_NAMES, Direction, MessageKind, ReconciliationMode
from .exceptions import ConfigError

logger = logging.getLogger(__name__)

A_TO_B = Direction.ALICE_TO_BOB
B_TO_A = Direction.BOB_TO_ALICE


def _setting(name, default):
    return getattr(settings, name, default)


# === CONFIGURATION ===

@dataclass(frozen=True)
class SessionConfig:
    """
    One simulated session. Unset tunables (None) take their values from
    settings when the session runs; see resolved().
    """
    protocol: str
    channel: PauliRates
    n_signals: int
    test_fraction: Optional[float] = None
    mode: str = ReconciliationMode.IDEAL
    block_size: Optional[int] = None
    redundancy_factor: Optional[float] = None
    slack: Optional[int] = None
    decode_confidence: Optional[float] = None
    seed: int = 0
    bstep_count: int = 0
    trial: int = 0

    def resolved(self):
        ideal = self.mode == ReconciliationMode.IDEAL
        default_factor = (
            _setting('RECONCILIATION_IDEAL_REDUNDANCY_FACTOR', 1.0) if ideal
            else _setting('RECONCILIATION_REDUNDANCY_FACTOR', 1.15)
        )
        return replace(
            self,
            test_fraction=_pick(self.test_fraction, _setting('SIMULATION_TEST_FRACTION', 0.1)),
            block_size=_pick(self.block_size, _setting('RECONCILIATION_BLOCK_SIZE', 20)),
            redundancy_factor=_pick(self.redundancy_factor, default_factor),
            slack=_pick(self.slack, _setting('RECONCILIATION_SLACK', 4)),
            decode_confidence=_pick(
                self.decode_confidence, _setting('RECONCILIATION_DECODE_CONFIDENCE', 0.9999),
            ),
        )

    @property
    def test_groups(self):
        """Test sets per basis: Z, X and Y for six-state, Z and X for BB84."""
        return 3 if self.protocol == Protocol.SIX_STATE else 2

    @property
    def test_bits(self):
        return int(round(self.test_fraction * self.n_signals))

    @property
    def raw_key_bits(self):
        return (self.n_signals - self.test_bits) // 2 * 2

    def validate(self):
        if self.protocol not in Protocol.values:
            raise ConfigError(f"Unknown protocol {self.protocol!r}")
        if self.mode not in ReconciliationMode.values:
            raise ConfigError(f"Unknown reconciliation mode {self.mode!r}")
        if not isinstance(self.channel, PauliRates):
            raise ConfigError("channel must be a PauliRates")
        if self.n_signals < 2 or self.n_signals % 2:
            raise ConfigError(f"n_signals must be even and at least 2, got {self.n_signals}")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError(f"test_fraction must lie in (0, 1), got {self.test_fraction}")
        if self.test_bits < self.test_groups:
            raise ConfigError(f"{self.test_bits} test bits cannot cover {self.test_groups} bases")
        if self.raw_key_bits < 2:
            raise ConfigError(f"test_fraction {self.test_fraction} leaves fewer than 2 raw key bits")
        if not 1 <= self.block_size <= MAX_BLOCK_SIZE:
            raise ConfigError(f"block_size must lie in [1, {MAX_BLOCK_SIZE}], got {self.block_size}")
        if self.redundancy_factor <= 0:
            raise ConfigError(f"redundancy_factor must be positive, got {self.redundancy_factor}")
        if self.slack < 0:
            raise ConfigError(f"slack must be non-negative, got {self.slack}")
        if not 0.0 <= self.decode_confidence < 1.0:
            raise ConfigError(f"decode_confidence must lie in [0, 1), got {self.decode_confidence}")
        if self.bstep_count < 0:
            raise ConfigError(f"bstep_count must be non-negative, got {self.bstep_count}")
        if self.seed < 0 or self.trial < 0:
            raise ConfigError("seed and trial must be non-negative")
        return self


def _pick(value, default):
    return default if value is None else value


def session_streams(seed, trial):
    """Independent generators for one (seed, trial) pair."""
    children = np.random.SeedSequence(seed, spawn_key=(trial,)).spawn(len(STREAM_NAMES))
    return SimpleNamespace(**{
        name: np.random.default_rng(child) for name, child in zip(STREAM_NAMES, children)
    })


# === PUBLIC CHANNEL ===

def seed_bits(seed):
    return ((seed >> np.arange(SEED_BITS - 1, -1, -1, dtype=np.int64)) & 1).astype(np.uint8)


class OneTimePad:
    """Pre-shared secret bits. Each draw is fresh and counted against the ledger."""

    def __init__(self, rng):
        self._rng = rng
        self._drawn = []
        self.consumed = 0

    def draw(self, length):
        offset = self.consumed
        bits = self._rng.integers(0, 2, size=length, dtype=np.uint8)
        self._drawn.append(bits)
        self.consumed += length
        return offset, bits

    def segment(self, offset, length):
        if offset < 0 or offset + length > self.consumed:
            raise ValueError(f"Pad bits [{offset}, {offset + length}) were never drawn")
        drawn = np.concatenate(self._drawn) if self._drawn else np.zeros(0, dtype=np.uint8)
        return drawn[offset:offset + length]


@dataclass(frozen=True, eq=False)
class Message:
    direction: str
    kind: str
    bits: np.ndarray
    pad_offset: Optional[int] = None
    seed: Optional[int] = None

    @property
    def byte_size(self):
        return (len(self.bits) + 7) // 8

    def hex(self):
        return np.packbits(self.bits).tobytes().hex()

    def payload(self):
        """Seeds print as decimal integers, everything else as packed hex."""
        return self.hex() if self.seed is None else str(self.seed)


class Transcript:
    """Ordered log of everything Alice and Bob say in public."""

    def __init__(self):
        self.messages = []
        # Parities behind each masked message, kept aside for audits only.
        self._unmasked = {}

    def send(self, direction, kind, bits, pad_offset=None, unmasked=None, seed=None):
        message = Message(direction, kind, codec.as_bits(bits).copy(), pad_offset, seed)
        if unmasked is not None:
            self._unmasked[len(self.messages)] = codec.as_bits(unmasked).copy()
        self.messages.append(message)
        return message

    def send_seed(self, direction, kind, seed):
        return self.send(direction, kind, seed_bits(seed), seed=seed)

    def of_kind(self, kind):
        return [message for message in self.messages if message.kind == kind]

    @property
    def byte_size(self):
        return sum(message.byte_size for message in self.messages)

    def hex_dump(self):
        return ''.join(
            f"{index:06d} {message.direction} {message.kind} {len(message.bits)} {message.payload()}\n"
            for index, message in enumerate(self.messages)
        )

    def masking_violations(self, pad):
        """
        Every parity message must travel Alice to Bob as its parities XOR a
        pad segment that no earlier message used. Returns what is wrong.
        """
        problems = []
        fresh_from = 0
        for index, message in enumerate(self.messages):
            if message.kind != MessageKind.PARITY:
                continue
            if message.direction != A_TO_B:
                problems.append(f"message {index}: parities sent {message.direction}")
                continue
            if message.pad_offset is None:
                problems.append(f"message {index}: parities sent without a pad")
                continue
            if message.pad_offset < fresh_from:
                problems.append(f"message {index}: pad bits from offset {message.pad_offset} reused")
            fresh_from = max(fresh_from, message.pad_offset + len(message.bits))
            unmasked = self._unmasked.get(index)
            if unmasked is None:
                problems.append(f"message {index}: no record of the parities behind it")
                continue
            try:
                expected = codec.otp_mask(unmasked, pad.segment(message.pad_offset, len(message.bits)))
            except ValueError as e:
                problems.append(f"message {index}: {e}")
                continue
            if not np.array_equal(message.bits, expected):
                problems.append(f"message {index}: bits are not the parities XOR the pad")
        return problems


# === REPORTS ===

@dataclass(frozen=True)
class KeyLedger:
    otp_consumed: int = 0
    final_even: int = 0
    final_odd0: int = 0
    final_odd1: int = 0

    @property
    def final_total(self):
        return self.final_even + self.final_odd0 + self.final_odd1

    @property
    def net(self):
        return self.final_total - self.otp_consumed


@dataclass(frozen=True)
class SessionReport:
    protocol: str
    mode: str
    seed: int
    trial: int
    n_signals: int
    channel: PauliRates
    bstep_count: int
    ledger: KeyLedger
    observed: ObservedRates
    estimated: PauliRates
    analytic_rate: float
    aborted: bool
    raw_key_bits: int
    blocks_even: int = 0
    blocks_odd: int = 0
    odd0_count: int = 0
    odd1_count: int = 0
    survivors: int = 0
    survivor_pauli_counts: tuple = (0, 0, 0, 0)
    decode_failures: int = 0
    keys_match: bool = True
    parities_masked: bool = True
    transcript_bytes: int = 0

    @property
    def empirical_net_rate(self):
        return self.ledger.net / self.raw_key_bits


@dataclass(frozen=True, eq=False)
class SessionOutcome:
    report: SessionReport
    transcript: Transcript
    alice_key: np.ndarray
    bob_key: np.ndarray


# === SESSION STEPS ===

@dataclass(frozen=True)
class Estimate:
    channel: PauliRates
    rate: float
    # Rate per surviving bit on the B-step path.
    inner_rate: Optional[float] = None


def estimate_channel(cfg, observed):
    """Channel estimate and the analytic rate the session is judged by."""
    k = cfg.bstep_count
    if cfg.protocol == Protocol.SIX_STATE:
        q = pauli_from_observed(observed, clip=True)
        if k == 0:
            return Estimate(q, keyrates.proposed_net_rate(q))
        scale, q_k = keyrates.bstep_iterates(q, k)[-1]
        inner = keyrates.oneway_rate(q_k)
        return Estimate(q, scale * inner, inner)

    p_Z, p_X = min(observed.p_Z, 0.5), min(observed.p_X, 0.5)
    if k == 0:
        worst = keyrates.bb84_proposed_net_rate(p_Z, p_X)
        return Estimate(bb84_worst_case_family(p_Z, p_X, worst.alpha), worst.rate)
    scale, inner = keyrates.bb84_bstep_rate_at(p_Z, p_X, k)
    return Estimate(bb84_worst_case_family(p_Z, p_X, inner.alpha), scale * inner.rate, inner.rate)


class _Session:
    """Channel use, testing and estimation shared by both paths."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.streams = session_streams(cfg.seed, cfg.trial)
        self.transcript = Transcript()
        self.pad = OneTimePad(self.streams.pad)
        self.reconciled_match = True

        errors = sample_errors(cfg.channel, cfg.n_signals, self.streams.channel)
        alice = self.streams.alice.integers(0, 2, size=cfg.n_signals, dtype=np.uint8)
        bob = alice ^ errors.bit_flags

        key_positions, self.observed = self._reveal_tests(alice, errors)
        self.alice = alice[key_positions]
        self.bob = bob[key_positions]
        self.bit_flags = errors.bit_flags[key_positions]
        self.phase_flags = errors.phase_flags[key_positions]

        self.estimate = estimate_channel(cfg, self.observed)
        self.aborted = self.estimate.rate <= 0
        if self.aborted:
            logger.info(
                f"Trial {cfg.trial}: aborting, rate {self.estimate.rate:.4f} at observed {self.observed}"
            )

    def _reveal_tests(self, alice, errors):
        cfg = self.cfg
        order = self.streams.test.permutation(cfg.n_signals)
        key_positions = np.sort(order[cfg.test_bits:])[:cfg.raw_key_bits]
        flags_by_basis = (
            errors.bit_flags,
            errors.phase_flags,
            errors.bit_flags ^ errors.phase_flags,
        )
        rates, counts = [], []
        for group, flags in zip(np.array_split(order[:cfg.test_bits], cfg.test_groups), flags_by_basis):
            group = np.sort(group)
            alice_bits = alice[group]
            bob_bits = alice_bits ^ flags[group]
            self.transcript.send(A_TO_B, MessageKind.TEST_REVEAL, alice_bits)
            self.transcript.send(B_TO_A, MessageKind.TEST_REVEAL, bob_bits)
            errors_seen = alice_bits ^ bob_bits
            rates.append(float(np.mean(errors_seen)))
            counts.append((int(errors_seen.sum()), len(group)))
        self.z_test_counts = counts[0]
        p_Y = rates[2] if cfg.protocol == Protocol.SIX_STATE else None
        return key_positions, ObservedRates(p_X=rates[1], p_Y=p_Y, p_Z=rates[0])

    @property
    def parity_prior(self):
        """P_odd = 2e(1 - e) at the upper confidence bound e on the Z-basis error rate."""
        errors, trials = self.z_test_counts
        e = min(upper_error_bound(errors, trials, _setting('RECONCILIATION_PRIOR_LEVEL', 0.95)), 0.5)
        return 2.0 * e * (1.0 - e)

    def exchange_parities(self, alice_parities, bob_parities):
        """Masked parities go A->B, the parity difference comes back B->A."""
        offset, pad_bits = self.pad.draw(len(alice_parities))
        masked = codec.otp_mask(alice_parities, pad_bits)
        self.transcript.send(A_TO_B, MessageKind.PARITY, masked, pad_offset=offset, unmasked=alice_parities)
        difference = codec.otp_mask(codec.otp_mask(masked, pad_bits), bob_parities)
        self.transcript.send(B_TO_A, MessageKind.PARITY_DIFF, difference)
        return difference

    def amplify(self, alice_bits, bob_bits, length):
        """Hash both reconciled strings to `length` bits with a published seed."""
        self.reconciled_match &= bool(np.array_equal(alice_bits, bob_bits))
        seed = codec.draw_seed(self.streams.amplify)
        self.transcript.send_seed(A_TO_B, MessageKind.HASH_SEED, seed)
        spec = codec.HashSpec.from_seed(seed, length, len(alice_bits))
        return codec.universal_hash(spec, alice_bits), codec.universal_hash(spec, bob_bits)

    def report(self, ledger, **counts):
        cfg = self.cfg
        return SessionReport(
            protocol=cfg.protocol,
            mode=cfg.mode,
            seed=cfg.seed,
            trial=cfg.trial,
            n_signals=cfg.n_signals,
            channel=cfg.channel,
            bstep_count=cfg.bstep_count,
            ledger=ledger,
            observed=self.observed,
            estimated=self.estimate.channel,
            analytic_rate=self.estimate.rate,
            aborted=self.aborted,
            raw_key_bits=cfg.raw_key_bits,
            parities_masked=not self.transcript.masking_violations(self.pad),
            transcript_bytes=self.transcript.byte_size,
            **counts,
        )

    def aborted_outcome(self):
        empty = np.zeros(0, dtype=np.uint8)
        return SessionOutcome(self.report(KeyLedger()), self.transcript, empty, empty)


def _branch_length(count, rate):
    return max(0, math.floor(count * rate))


def _ideal_parity_difference(session, alice_parities, bob_parities, true_difference):
    """
    Charge the ledger for ceil(r * blocks * H(P_even, P_odd)) + slack parities
    of a Toeplitz parity map, then mark blocks by their true parity.
    """
    cfg = session.cfg
    blocks = len(alice_parities)
    p_odd = float(np.mean(true_difference))
    length = min(blocks, math.ceil(cfg.redundancy_factor * blocks * binary_entropy(p_odd)) + cfg.slack)
    seed = codec.draw_seed(session.streams.reconcile)
    session.transcript.send_seed(A_TO_B, MessageKind.MATRIX_SEED, seed)
    parity_map = codec.HashSpec.from_seed(seed, length, blocks)
    session.exchange_parities(
        codec.universal_hash(parity_map, alice_parities),
        codec.universal_hash(parity_map, bob_parities),
    )
    return true_difference.copy(), 0


def _decoded_parity_difference(session, alice_parities, bob_parities, true_difference):
    """
    Decode the parity difference chunk by chunk.

    Each chunk of m parities gets a full-rank m x m matrix from a published
    seed. Alice first sends l = ceil(r * m * h(prior)) + slack of its rows;
    while the decoded pattern holds less than cfg.decode_confidence of the
    posterior, Bob asks for more rows. At l = m the pattern is unique.
    """
    cfg = session.cfg
    prior = session.parity_prior
    h = binary_entropy(prior)
    step = max(1, _setting('RECONCILIATION_EXTRA_PARITIES', 2))
    decoded = np.empty_like(true_difference)
    failures = 0
    requests = 0
    for start in range(0, len(alice_parities), cfg.block_size):
        stop = min(start + cfg.block_size, len(alice_parities))
        m = stop - start
        alice_chunk, bob_chunk = alice_parities[start:stop], bob_parities[start:stop]
        seed = codec.draw_seed(session.streams.reconcile)
        session.transcript.send_seed(A_TO_B, MessageKind.MATRIX_SEED, seed)
        decoder = codec.PrefixDecoder(codec.random_invertible_matrix(m, seed))

        l = min(m, math.ceil(cfg.redundancy_factor * m * h) + cfg.slack)
        rows = decoder.rows(0, l)
        t = session.exchange_parities(codec.syndrome(rows, alice_chunk), codec.syndrome(rows, bob_chunk))
        result = decoder.decode(t, prior)
        while result.confidence < cfg.decode_confidence and l < m:
            more = min(m, l + step)
            session.transcript.send(B_TO_A, MessageKind.PARITY_REQUEST, _request_bits(more))
            rows = decoder.rows(l, more)
            extra = session.exchange_parities(codec.syndrome(rows, alice_chunk), codec.syndrome(rows, bob_chunk))
            t = np.concatenate([t, extra])
            l = more
            requests += 1
            result = decoder.decode(t, prior)

        decoded[start:stop] = result.pattern
        if not np.array_equal(result.pattern, true_difference[start:stop]):
            failures += 1
            logger.debug(
                f"Trial {cfg.trial}: chunk at block {start} decoded wrongly "
                f"({l} of {m} parities, confidence {result.confidence:.6f})"
            )
    if requests:
        logger.debug(f"Trial {cfg.trial}: {requests} request(s) for extra parities at prior {prior:.4f}")
    return decoded, failures


def _request_bits(total):
    """Requested parity total as one byte."""
    return np.unpackbits(np.array([total], dtype=np.uint8))


def _proposed_outcome(cfg):
    session = _Session(cfg)
    if session.aborted:
        return session.aborted_outcome()
    q = session.estimate.channel
    a1, a2 = session.alice[0::2], session.alice[1::2]
    b1, b2 = session.bob[0::2], session.bob[1::2]
    first_flags = session.bit_flags[0::2]

    alice_parities, bob_parities = a1 ^ a2, b1 ^ b2
    true_difference = alice_parities ^ bob_parities
    if cfg.mode == ReconciliationMode.IDEAL:
        difference, failures = _ideal_parity_difference(session, alice_parities, bob_parities, true_difference)
    else:
        difference, failures = _decoded_parity_difference(session, alice_parities, bob_parities, true_difference)
    even = difference == 0
    odd = ~even

    # Even blocks: both bits flipped or neither; Bob undoes the common flip.
    alice_even = np.column_stack([a1[even], a2[even]]).ravel()
    bob_even = np.column_stack([b1[even] ^ first_flags[even], b2[even] ^ first_flags[even]]).ravel()
    even_length = _branch_length(int(even.sum()), 2.0 - keyrates.even_block_entropy(q))
    even_a, even_b = session.amplify(alice_even, bob_even, even_length)

    # Odd blocks: first bits are announced, the other bit of the pair is the key.
    session.transcript.send(A_TO_B, MessageKind.FIRST_BITS, a1[odd])
    session.transcript.send(B_TO_A, MessageKind.FIRST_BITS, b1[odd])
    first_error = a1[odd] ^ b1[odd]
    second_bob = b2[odd] ^ (1 - first_error)
    x0 = first_error == 0
    h_xy, h_iz = keyrates.odd_branch_entropies(q)
    odd0_length = _branch_length(int(x0.sum()), 1.0 - h_xy)
    odd1_length = _branch_length(int((~x0).sum()), 1.0 - h_iz)
    odd0_a, odd0_b = session.amplify(a2[odd][x0], second_bob[x0], odd0_length)
    odd1_a, odd1_b = session.amplify(a2[odd][~x0], second_bob[~x0], odd1_length)

    alice_key = np.concatenate([even_a, odd0_a, odd1_a])
    bob_key = np.concatenate([even_b, odd0_b, odd1_b])
    ledger = KeyLedger(
        otp_consumed=session.pad.consumed,
        final_even=even_length,
        final_odd0=odd0_length,
        final_odd1=odd1_length,
    )
    keys_match = bool(np.array_equal(alice_key, bob_key)) and session.reconciled_match and failures == 0
    report = session.report(
        ledger,
        blocks_even=int(even.sum()),
        blocks_odd=int(odd.sum()),
        odd0_count=int(x0.sum()),
        odd1_count=int((~x0).sum()),
        decode_failures=failures,
        keys_match=keys_match,
    )
    return SessionOutcome(report, session.transcript, alice_key, bob_key)


def _bstep_outcome(cfg):
    session = _Session(cfg)
    if session.aborted:
        return session.aborted_outcome()
    alice, bob = session.alice, session.bob
    bit, phase = session.bit_flags, session.phase_flags
    blocks_even = blocks_odd = 0

    for step in range(cfg.bstep_count):
        pairs = len(alice) // 2
        if pairs == 0:
            break
        first, second = slice(0, 2 * pairs, 2), slice(1, 2 * pairs, 2)
        alice_parities = alice[first] ^ alice[second]
        bob_parities = bob[first] ^ bob[second]
        session.transcript.send(A_TO_B, MessageKind.BSTEP_PARITY, alice_parities)
        session.transcript.send(B_TO_A, MessageKind.BSTEP_PARITY, bob_parities)
        keep = alice_parities == bob_parities
        if step == 0:
            blocks_even = int(keep.sum())
            blocks_odd = pairs - blocks_even
        alice, bob = alice[first][keep], bob[first][keep]
        bit, phase = bit[first][keep], (phase[first] ^ phase[second])[keep]

    # One-way error correction is ideal here; its cost is inside the one-way rate.
    corrected = bob ^ bit
    length = _branch_length(len(alice), session.estimate.inner_rate)
    alice_key, bob_key = session.amplify(alice, corrected, length)

    report = session.report(
        KeyLedger(final_even=length),
        blocks_even=blocks_even,
        blocks_odd=blocks_odd,
        survivors=len(alice),
        survivor_pauli_counts=pauli_counts(bit, phase),
        keys_match=bool(np.array_equal(alice_key, bob_key)) and session.reconciled_match,
    )
    return SessionOutcome(report, session.transcript, alice_key, bob_key)


def _checked(cfg):
    try:
        return cfg.resolved().validate()
    except (AttributeError, TypeError) as e:
        raise ConfigError(f"Malformed session config: {e}") from e


def run_session(cfg):
    """Run the OTP-assisted preprocessing once and report on it."""
    cfg = _checked(cfg)
    if cfg.bstep_count:
        raise ConfigError("run_session runs the preprocessing path; B-step sessions go through run_bstep_session")
    return _proposed_outcome(cfg).report


def run_bstep_session(cfg):
    """Run bstep_count B-steps and one-way distillation once and report on it."""
    cfg = _checked(cfg)
    if cfg.bstep_count < 1:
        raise ConfigError("run_bstep_session needs bstep_count >= 1")
    return _bstep_outcome(cfg).report


def execute_session(cfg):
    """Either path, chosen by bstep_count, with the transcript and keys kept."""
    cfg = _checked(cfg)
    outcome = _bstep_outcome(cfg) if cfg.bstep_count else _proposed_outcome(cfg)
    report = outcome.report
    logger.debug(
        f"Trial {cfg.trial}: net {report.ledger.net} bits of {report.raw_key_bits}, keys_match={report.keys_match}"
    )
    return outcome


# === BATCHES ===

@dataclass(frozen=True)
class BatchSummary:
    config: SessionConfig
    reports: tuple
    # SessionOutcomes in trial order, when the batch kept them.
    outcomes: tuple = field(default=(), compare=False, repr=False)

    @property
    def trials(self):
        return len(self.reports)

    @property
    def rates(self):
        return np.array([report.empirical_net_rate for report in self.reports])

    @property
    def mean(self):
        return float(self.rates.mean())

    @property
    def stddev(self):
        return float(self.rates.std(ddof=1)) if self.trials > 1 else 0.0

    @property
    def stderr(self):
        return self.stddev / math.sqrt(self.trials)

    @property
    def all_keys_match(self):
        return all(report.keys_match for report in self.reports)

    @property
    def aborted(self):
        return sum(report.aborted for report in self.reports)


def summarize(cfg, reports):
    return BatchSummary(cfg, tuple(sorted(reports, key=lambda report: report.trial)))


def summarize_outcomes(cfg, outcomes):
    outcomes = tuple(sorted(outcomes, key=lambda outcome: outcome.report.trial))
    return BatchSummary(cfg, tuple(outcome.report for outcome in outcomes), outcomes)


def run_trials(cfg, trials):
    """Outcomes for trials 0..trials-1 of cfg, each with its own derived seed."""
    if trials < 1:
        raise ConfigError(f"Need at least one trial, got {trials}")
    return [execute_session(replace(cfg, trial=trial)) for trial in range(trials)]


def batch(cfgs, trials_each, runner=run_trials):
    """
    One BatchSummary per config. `runner(cfg, trials)` produces the outcomes;
    simulation.tasks.queue_batch runs them on the cluster instead.
    """
    summaries = []
    for cfg in cfgs:
        summary = summarize_outcomes(cfg, runner(cfg, trials_each))
        logger.info(
            f"Batch of {summary.trials}: mean net rate {summary.mean:.6f} +/- {summary.stderr:.6f}"
        )
        summaries.append(summary)
    return summaries
