from django.db import models


class Protocol(models.TextChoices):
    SIX_STATE = 'six-state', 'Six-state'
    BB84 = 'bb84', 'BB84'


class Variant(models.TextChoices):
    SIX_STATE_ONE_WAY = 'six-state-oneway', 'Six-state, one-way'
    SIX_STATE_PROPOSED = 'six-state-proposed', 'Six-state, OTP-assisted preprocessing'
    SIX_STATE_BSTEP_OPT = 'six-state-bstep', 'Six-state, optimal B-steps'
    BB84_ONE_WAY = 'bb84-oneway', 'BB84, one-way'
    BB84_PROPOSED = 'bb84-proposed', 'BB84, OTP-assisted preprocessing'
    BB84_BSTEP_OPT = 'bb84-bstep', 'BB84, optimal B-steps'


# (protocol, short name used on the command line) -> variant
VARIANTS_BY_NAME = {
    (Protocol.SIX_STATE, 'oneway'): Variant.SIX_STATE_ONE_WAY,
    (Protocol.SIX_STATE, 'proposed'): Variant.SIX_STATE_PROPOSED,
    (Protocol.SIX_STATE, 'bstep'): Variant.SIX_STATE_BSTEP_OPT,
    (Protocol.BB84, 'oneway'): Variant.BB84_ONE_WAY,
    (Protocol.BB84, 'proposed'): Variant.BB84_PROPOSED,
    (Protocol.BB84, 'bstep'): Variant.BB84_BSTEP_OPT,
}

VARIANT_NAMES = ('oneway', 'proposed', 'bstep')

BB84_VARIANTS = frozenset({Variant.BB84_ONE_WAY, Variant.BB84_PROPOSED, Variant.BB84_BSTEP_OPT})
BSTEP_VARIANTS = frozenset({Variant.SIX_STATE_BSTEP_OPT, Variant.BB84_BSTEP_OPT})

# Largest admissible bit-error rate per protocol family (depolarizing p <= 1/3 means p_Z <= 2/3).
MAX_PARAM = {
    Protocol.SIX_STATE: 2.0 / 3.0,
    Protocol.BB84: 0.5,
}


def protocol_of(variant):
    return Protocol.BB84 if variant in BB84_VARIANTS else Protocol.SIX_STATE

# Default sweep for the rates command: far enough past every crossing.
DEFAULT_CURVE_END = {
    Protocol.SIX_STATE: 0.16,
    Protocol.BB84: 0.14,
}
DEFAULT_CURVE_STEPS = 161
