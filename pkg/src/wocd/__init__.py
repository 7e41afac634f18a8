"""Semi-supervised overlapping community detection with weak cliques."""

from .cliques import (
    CliqueRecord,
    CliqueSet,
    identify_weak_cliques,
    node_priority,
    salton_index,
    weak_clique,
)
from .graph import (
    Cover,
    FormatError,
    Graph,
    SampledLabels,
    SynthConfig,
    load_cover,
    load_edge_list,
    load_features,
    sample_labels,
    synth_graph,
    write_cover,
    write_edge_list,
    write_features,
)
from .metrics import MetricReport, metric_report, onmi
from .model import (
    AdamState,
    DegenerateProjectionError,
    FusionParams,
    ModelParams,
    adam_step,
    gcn_forward,
    gcn_norm,
    gradients,
    gt_forward,
    init_params,
    loss,
    loss_and_gradients,
    predict,
)
from .pseudo import (
    PseudoConfig,
    construct_pseudo_labels,
    pseudo_coverage,
    refresh_pseudo_labels,
    union_covers,
)
from .train import (
    RunReport,
    TrainConfig,
    binarize,
    initial_training,
    refined_training,
    run_pipeline,
)

__version__ = "0.1.0"
