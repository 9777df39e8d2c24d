from .graphs import (BipartiteParams, VertexEdgeParams, act_bipartite, act_vertex_edge, axis_sum,
                     bipartite_feature_layer, vertex_edge_layer)
from .matrices import (DArrayParams, MatrixLayerParams, all_axis_subsets, augmented_layer,
                       darray_layer, exch_matrix_layer, pooled_sum)
from .pooling import (POOLINGS, USTAT_EXACT_LIMIT, USTAT_SAMPLES, canonical_order, element_ranks,
                      ordered_tuples, pool, sample_subsets, subset_table, ustat_plan)
from .sets import (SetLayerGrads, SetLayerParams, draw_set_noise, equivariant_set_layer,
                   invariant_set_layer, linear_set_layer, set_layer_backward, set_layer_forward)
from .stack import (LayerStack, draw_stack_noise, layer_from_dict, layer_to_dict, stack_backward,
                    stack_forward, stack_forward_batch, stack_from_dict, stack_to_dict)
from .tau import TauResult, tau_equivariant_apply
from .train import (SET_TASKS, TrainingDivergedError, TrainResult, evaluate_mse, fit_matrix_layer,
                    matrix_dataset, matrix_features, set_dataset, sgd_train)

__all__ = [
    "BipartiteParams", "VertexEdgeParams", "act_bipartite", "act_vertex_edge", "axis_sum",
    "bipartite_feature_layer", "vertex_edge_layer",
    "DArrayParams", "MatrixLayerParams", "all_axis_subsets", "augmented_layer", "darray_layer",
    "exch_matrix_layer", "pooled_sum",
    "POOLINGS", "USTAT_EXACT_LIMIT", "USTAT_SAMPLES", "canonical_order", "element_ranks",
    "ordered_tuples", "pool", "sample_subsets", "subset_table", "ustat_plan",
    "SetLayerGrads", "SetLayerParams", "draw_set_noise", "equivariant_set_layer",
    "invariant_set_layer", "linear_set_layer", "set_layer_backward", "set_layer_forward",
    "LayerStack", "draw_stack_noise", "layer_from_dict", "layer_to_dict", "stack_backward",
    "stack_forward", "stack_forward_batch", "stack_from_dict", "stack_to_dict",
    "TauResult", "tau_equivariant_apply",
    "SET_TASKS", "TrainingDivergedError", "TrainResult", "evaluate_mse", "fit_matrix_layer",
    "matrix_dataset", "matrix_features", "set_dataset", "sgd_train",
]
