"""Three-role simulation: file formats, CLI and the evaluation harness."""
from .config import PipelineConfig, load_config
from .evaluation import (ExperimentRecord, eval_ap_sensitivity, eval_ber_curve,
                         eval_energy_leak, eval_keyspace, eval_plaintext_attack)

__all__ = ["ExperimentRecord", "PipelineConfig", "eval_ap_sensitivity", "eval_ber_curve",
           "eval_energy_leak", "eval_keyspace", "eval_plaintext_attack", "load_config"]
