"""Two-user downlink superposition design and finite-blocklength evaluation."""

from .system import SnrPair, SubBlockLayout, SystemConfig, db_to_linear, linear_to_db, snr_to_channel, validate
from .constellation import Constellation, build_qam, min_distance, superimpose
from .design import (
    ModulationTuple,
    PowerAllocation,
    TransmitSpec,
    assign_power,
    balanced_allocation,
    build_transmit_spec,
    feasible_tuples,
    max_mod_orders,
)
from .fbl import (
    McEstimate,
    RatePoint,
    dt_bound_epsilon,
    epsilon_from_rate,
    info_density,
    info_density_user1,
    mi_dispersion,
    qfunc,
    qinv,
    rate_point,
    rate_user1,
    rate_user2,
)

__version__ = "0.1.0"
