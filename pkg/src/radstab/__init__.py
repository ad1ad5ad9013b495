"""radstab: segmentation-perturbation workbench for radiomic stability studies.

The package covers the full experiment loop: synthetic cohort generation,
mask-variant generation with DSC bookkeeping, 1130-feature extraction,
feature harmonization, univariate screening, an explainable prediction
protocol, and feature-stability metrics, all wired together by the
``radstab`` command-line tool.
"""

from .errors import DataError, NumericalError, RadstabError
from .volumes import (
    BinaryMask,
    ImageVolume,
    load_mask,
    load_volume,
    save_mask,
    save_volume,
)
from .tables import (
    CohortRecord,
    FeatureTable,
    load_cohort_records,
    load_feature_table,
    save_cohort_records,
    save_feature_table,
)
from .perturb import (
    StructuringElement,
    VariantSet,
    ball,
    dice,
    dilate,
    erode,
    inscribed_ellipsoid,
    make_variants,
)
from .filters import log_filter, wavelet_decompose
from .discretize import DiscretizedRoi, discretize
from .extract import ExtractionConfig, FeatureExtractor, extract_cohort
from .synth import synth_cohort, write_cohort
from .harmonize import (
    CombatHarmonizer,
    ZscoreScaler,
    combat_apply,
    combat_fit,
    zscore_apply,
    zscore_fit,
)
from .stability import (
    ReliabilityScores,
    ReliabilityThresholds,
    icc2,
    pearson,
    reliability_scores,
    stability_report,
)
from .splits import SplitPlan, make_splits, stage_rng
from .sampling import Smote, smote
from .select import AnovaFSelector, anova_f_select, anova_f_values
from .logreg import L1LogisticRegression, fit_l1_logreg
from .shap_linear import LinearShapExplainer, ShapRanking, linear_shap
from .metrics import SkillScores, roc_auc, skill
from .protocol import (
    ModelRun,
    ProtocolConfig,
    best_shap_aggregate,
    clinical_models,
    run_protocol,
)
from .stats import (
    TestResult,
    chi_squared,
    ks_two_sample,
    mean_ci95,
    univariate_screen,
)
from .config import RunConfig, load_config, save_config

__version__ = "0.1.0"

__all__ = [
    "AnovaFSelector",
    "BinaryMask",
    "CohortRecord",
    "CombatHarmonizer",
    "DataError",
    "DiscretizedRoi",
    "ExtractionConfig",
    "FeatureExtractor",
    "FeatureTable",
    "ImageVolume",
    "L1LogisticRegression",
    "LinearShapExplainer",
    "ModelRun",
    "NumericalError",
    "ProtocolConfig",
    "RadstabError",
    "ReliabilityScores",
    "ReliabilityThresholds",
    "RunConfig",
    "ShapRanking",
    "SkillScores",
    "Smote",
    "SplitPlan",
    "StructuringElement",
    "TestResult",
    "VariantSet",
    "ZscoreScaler",
    "anova_f_select",
    "anova_f_values",
    "ball",
    "best_shap_aggregate",
    "chi_squared",
    "clinical_models",
    "combat_apply",
    "combat_fit",
    "dice",
    "dilate",
    "discretize",
    "erode",
    "extract_cohort",
    "fit_l1_logreg",
    "icc2",
    "inscribed_ellipsoid",
    "ks_two_sample",
    "linear_shap",
    "load_cohort_records",
    "load_config",
    "load_feature_table",
    "load_mask",
    "load_volume",
    "log_filter",
    "make_splits",
    "make_variants",
    "mean_ci95",
    "pearson",
    "reliability_scores",
    "roc_auc",
    "run_protocol",
    "save_cohort_records",
    "save_config",
    "save_feature_table",
    "save_mask",
    "save_volume",
    "skill",
    "smote",
    "stability_report",
    "stage_rng",
    "synth_cohort",
    "univariate_screen",
    "wavelet_decompose",
    "write_cohort",
    "zscore_apply",
    "zscore_fit",
]
