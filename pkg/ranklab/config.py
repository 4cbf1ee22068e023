from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


ROOT_DIR = Path(__file__).resolve(strict=True).parent.parent


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=(ROOT_DIR / ".env"), env_prefix="RANKLAB_", extra="ignore", populate_by_name=True
    )

    tool_version: str = "0.1.0"
    cache_dir: Path = Field(Path(".ranklab-cache"), validation_alias="RANKLAB_CACHE")
    closure_cap: int = 2**20
    class_budget: int = 10**6
    multiplication_table_cap: int = 2**13
    d_search_max: int = 6
    d_search_order_cap: int = 10**4
    matrix_degree_cap: int = 3**10
    prop_key_search_cap: int = 5**6
    default_seed: int = 7
    default_trials: int = 200
    workers: int = 4

    @property
    def cache_root(self) -> Path:
        if self.cache_dir.is_absolute():
            return self.cache_dir
        return Path.cwd() / self.cache_dir


settings = Settings()  # type: ignore
