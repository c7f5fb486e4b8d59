from pathlib import Path

from environs import Env


env = Env()
env.read_env()

APPLICATION_ROOT = Path(__file__).resolve().parent.parent

# Cap on the number of worker processes the dispatcher starts; with 1, every
# check runs inline in the calling process
THREADS = env.int("WFSEQ_THREADS", default=1)

# Seed used for every random sample when a command does not pass --seed
SEED = env.int("WFSEQ_SEED", default=42)

# Tolerance of the float timing mode; rational mode never reads it
FLOAT_TOL = env.float("WFSEQ_FLOAT_TOL", default=1e-9)

# The acceptance suite run by `wfseq report`
SUITE_PATH = env.path(
    "WFSEQ_SUITE_PATH", default=APPLICATION_ROOT / "wfseq" / "suite.yaml"
)

# Relative --output paths are resolved against this directory
OUTPUT_DIR = env.path("WFSEQ_OUTPUT_DIR", default=Path.cwd())
