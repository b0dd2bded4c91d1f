"""Association-rule mining and profiling over threat-actor technique reports.

Pipeline: reference bases -> entity extraction -> per-actor transaction
tables -> directed 1->1 rule mining -> actor profiling and comparison.
"""

from .errors import (
    DuplicateDocumentError,
    InputError,
    PipelineError,
    UnknownDocumentError,
)
from .extraction import (
    Document,
    EntityDB,
    EntityRecord,
    GazetteerMatcher,
    actor_of_document,
    build_entity_db,
    extract_entities,
)
from .miner import (
    AssociationRule,
    MiningParams,
    RuleMetrics,
    RuleSet,
    brute_force_rules,
    candidate_support_threshold,
    compute_rule_metrics,
    mine_actor_rules,
    mine_all,
)
from .profiling import (
    ActorProfile,
    SharedRuleEntry,
    SimilarityMatrix,
    SummaryStats,
    dice_standard,
    jaccard,
    overlap_dice,
    repetitive_subset,
    shared_rules,
    similarity_matrix,
    summary_stats,
    top_k_rules,
)
from .refbase import (
    EntityCategory,
    RefEntry,
    ReferenceBase,
    load_refbase,
    load_reference_dir,
    normalize,
    resolve_alias,
)
from .transactions import (
    ItemMode,
    Transaction,
    TransactionTable,
    build_transaction_table,
    qualify_document,
)

__version__ = "0.1.0"
