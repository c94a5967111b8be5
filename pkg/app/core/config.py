"""Configuration for the application."""
from pydantic_settings import BaseSettings, SettingsConfigDict

class Config(BaseSettings):
  """Global process configuration.

  Experiment parameters (data, model, schedule, fusion) live in
  `app.models.config.ExperimentConfig`; this object only carries settings
  that belong to the running process.
  """

  model_config = SettingsConfigDict(env_prefix="STEPNET_")

  log_level: str = "INFO"
  seed: int = 0
  deterministic: bool = True

  # Non-essential parameters
  enable_file_logging: bool = False
  log_file_path: str = "logs/stepnet.log"

  # Run layout
  workdir: str = "runs"
  num_workers: int = 2


class ConfigManager:
  """Singleton class to manage the global config."""

  _instance: Config | None = None

  @classmethod
  def get_config(cls) -> Config:
    """Get the global config instance."""
    if cls._instance is None:
      cls._instance = Config()
    return cls._instance

  @classmethod
  def init_config(
    cls,
    log_level: str | None = None,
    seed: int | None = None,
    deterministic: bool | None = None,
    workdir: str | None = None,
  ) -> Config:
    """Initialize the global config with CLI parameters.

    Arguments left as None fall back to the environment (``STEPNET_*``)
    or to the field defaults.

    Args:
        log_level: Logging level
        seed: Run seed
        deterministic: Fixed reduction order and single-threaded kernels
        workdir: Root directory for run outputs

    """
    config_kwargs = {}

    if log_level is not None:
      config_kwargs["log_level"] = log_level
    if seed is not None:
      config_kwargs["seed"] = seed
    if deterministic is not None:
      config_kwargs["deterministic"] = deterministic
    if workdir is not None:
      config_kwargs["workdir"] = workdir
    cls._instance = Config(**config_kwargs)
    return cls._instance

# Convenience functions
def get_config() -> Config:
  """Get the global config instance."""
  return ConfigManager.get_config()

def init_config(
  log_level: str | None = None,
  seed: int | None = None,
  deterministic: bool | None = None,
  workdir: str | None = None,
) -> Config:
  """Initialize the global config with CLI parameters.

  Args:
      log_level: Logging level
      seed: Run seed
      deterministic: Fixed reduction order and single-threaded kernels
      workdir: Root directory for run outputs

  """
  return ConfigManager.init_config(
    log_level=log_level,
    seed=seed,
    deterministic=deterministic,
    workdir=workdir,
  )
