"""Vector hysteresis material model and 2-D transient magnet solver."""

from ._hystermag import (
    MU0,
    AnhystereticCurve,
    ConfigError,
    InvalidInput,
    OutOfRange,
    PlayConfig,
    PlayState,
    SolverError,
    aposteriori_density,
    bench_inversion,
    eddy_denominator,
    eddy_loss_density,
    eval_hyst,
    hysteresis_denominator,
    invert,
    langevin,
    mesh_summary,
    play_update,
    prepare_major_branch,
    simulate,
)

__version__ = "0.1.0"
