"""Desk-scale laboratory for causal adversarial erasure channels.

Subpackages: core word types, rate-bound numerics, forbidden-ball
combinatorics, adversary strategies, systematic code tables with pruning
and exhaustive decoding, and a deterministic Monte Carlo harness, all wired
behind the `cel` command line.
"""

from .bounds import (
    BOUND_ORDER,
    DeltaEta,
    RateCurve,
    RatePoint,
    binary_entropy,
    classical_bounds,
    constraint_check,
    emit_curves,
    g_p,
    p_one,
    phi_intersection,
    rate_delta_eta,
    rate_lower,
    rate_upper,
    root_r,
)
from .channels import (
    BurstEraser,
    ChannelDecision,
    OmniscientEraser,
    Strategy,
    TwoStepAdversary,
    UniformRandomEraser,
    WaitPushAdversary,
    WaitPushConfig,
    burst_eraser,
    omniscient_eraser,
    transmit,
    two_step_adversary,
    uniform_random_eraser,
    wait_push_adversary,
)
from .codes import (
    CodeTable,
    DecodeResult,
    PrunedCode,
    PruningError,
    consistent_set,
    decode,
    goodness_check,
    min_same_prefix_distance,
    prefix_entropy,
    prune,
    sample_systematic_code,
)
from .core import (
    Codeword,
    ErasurePattern,
    Message,
    ReceivedWord,
    erase,
    erasure_count,
    hamming_distance,
    is_consistent,
)
from .forbidden import (
    BallSpec,
    ball_contains,
    ball_enumerate,
    ball_size_exact,
    lemma3_bound_check,
)
from .sim import (
    CodeSpec,
    ErrorEstimate,
    ExperimentConfig,
    MatrixReport,
    estimate_p_avg,
    estimate_p_max,
    mix64,
    run_matrix,
    wilson_interval,
)

__version__ = "0.1.0"
