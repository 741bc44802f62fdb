from django.db import models


class ReconciliationMode(models.TextChoices):
    IDEAL = 'ideal', 'Ideal accounting'
    EXPLICIT = 'explicit', 'Explicit small-block decoding'


class Direction(models.TextChoices):
    ALICE_TO_BOB = 'A->B', 'Alice to Bob'
    BOB_TO_ALICE = 'B->A', 'Bob to Alice'


class MessageKind(models.TextChoices):
    TEST_REVEAL = 'test-reveal', 'Test bits'
    MATRIX_SEED = 'matrix-seed', 'Parity map seed'
    PARITY = 'parity', 'Masked parities'
    PARITY_DIFF = 'parity-diff', 'Parity difference'
    PARITY_REQUEST = 'parity-request', 'Request for more parities'
    FIRST_BITS = 'first-bits', 'First bits of odd blocks'
    BSTEP_PARITY = 'bstep-parity', 'B-step pair parities'
    HASH_SEED = 'hash-seed', 'Privacy amplification seed'


# Independent random streams spawned per (seed, trial), in spawn order.
STREAM_NAMES = ('channel', 'alice', 'test', 'reconcile', 'pad', 'amplify')

# Seeds travel in transcripts as 64-bit words.
SEED_BITS = 64

# Hard limit for exhaustively decoded blocks.
MAX_BLOCK_SIZE = 24
