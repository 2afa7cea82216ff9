"""Stability and quality laboratory for random-walk node embeddings.

Thin re-export of the compiled core. Everything heavy (walk generation,
skip-gram training, exact Wasserstein matching, experiment runs) happens in
C++; this package just makes those operations callable from Python with
numpy arrays in and out.
"""

from ._core import (
    Graph,
    LinkDistribution,
    PointCloud,
    ScoreSweep,
    WalkCorpus,
    __version__,
    auprc,
    auroc,
    bonferroni,
    build_walks,
    cloud_diameter,
    distribution_distance,
    empirical_link_distribution,
    generate_er,
    generate_sbm,
    graph_from_edges,
    hausdorff,
    link_quality,
    load_cloud,
    load_graph,
    mann_whitney_u,
    normalize_diameter,
    num_pairs,
    observed_link_distribution,
    pair_index,
    pool_embeddings,
    procrustes_align,
    project_pca,
    run_experiment,
    save_cloud,
    save_graph,
    score_sweep,
    solve_assignment,
    spearman,
    train_embedding,
    wasserstein2,
    wasserstein2_matching,
    wilcoxon_signed_rank,
)

__all__ = [
    "Graph",
    "LinkDistribution",
    "PointCloud",
    "ScoreSweep",
    "WalkCorpus",
    "__version__",
    "auprc",
    "auroc",
    "bonferroni",
    "build_walks",
    "cloud_diameter",
    "distribution_distance",
    "empirical_link_distribution",
    "generate_er",
    "generate_sbm",
    "graph_from_edges",
    "hausdorff",
    "link_quality",
    "load_cloud",
    "load_graph",
    "mann_whitney_u",
    "normalize_diameter",
    "num_pairs",
    "observed_link_distribution",
    "pair_index",
    "pool_embeddings",
    "procrustes_align",
    "project_pca",
    "run_experiment",
    "save_cloud",
    "save_graph",
    "score_sweep",
    "solve_assignment",
    "spearman",
    "train_embedding",
    "wasserstein2",
    "wasserstein2_matching",
    "wilcoxon_signed_rank",
]
