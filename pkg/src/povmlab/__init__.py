"""Coherent-state POVMs, isotropic depolarization and SU(N) phase-space negativity."""
__version__ = "0.1.0"

from .channels import (
    ChannelSpec,
    depolarize,
    equivalence_time,
    integrate_master_equation,
    iterate_channel,
    lambda_estimate,
    lindblad_rhs,
    povm_channel_analytic,
    povm_channel_monte_carlo,
    trajectory_average,
    trajectory_sample,
)
from .circuits import (
    direct_protocol,
    hadamard_test,
    lcu_decomposition,
    lcu_protocol,
    rotation_decomposition,
    swap_test_protocol,
)
from .coherent import (
    OmegaAngles,
    bloch_vector_of_state,
    coherent_state,
    povm_element,
    rotation_gate,
    sample_haar,
)
from .phase_space import (
    SWParams,
    classify_single_shot,
    grid_w,
    min_w_over_phase_space,
    n_critical,
    quasiprob,
    reconstruct_operator,
    s_max,
    s_min,
    sw_kernel,
    w0_min_paper,
    w_evolution,
    w_min_physical,
)
from .sun_algebra import (
    GeneratorBasis,
    bloch_compose,
    bloch_decompose,
    casimir_contraction,
    generator_basis,
    twirl,
)
