from .generators import SimScenario, gen_coefficients, gen_dataset, gen_errors, replication_rng
from .structures import structures_dict
from .study import SimResult, evaluate_replication, run_study
