import os
from dataclasses import dataclass, field
from typing import Optional

from dotenv import dotenv_values, load_dotenv

load_dotenv()

SCHEMA_VERSION = "1.0"


class Config:
    OUTPUT_DIR = os.environ.get('NANOSPIN_OUTPUT_DIR') or 'output'
    LOG_LEVEL = os.environ.get('NANOSPIN_LOG_LEVEL', 'INFO')

    # Monte Carlo settings
    WORKERS = int(os.environ.get('NANOSPIN_WORKERS', '1'))
    DEFAULT_SEED = 20031

    # Line shape settings
    DEFAULT_T2 = float(os.environ.get('NANOSPIN_T2', '2e-3'))  # 2 ms

    # Validation settings
    VALIDATE_MAX_N = 10
    VALIDATE_TOLERANCE = 1e-10


def read_config_file(path):
    """Parse a `key = value` file; dashes in keys map to underscores"""
    values = dotenv_values(path)
    return {key.strip().replace('-', '_'): value for key, value in values.items() if value is not None}


@dataclass
class RunConfig:
    command: str
    values: dict
    config_file: Optional[str] = None
    schema_version: str = SCHEMA_VERSION
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_namespace(cls, args, config_file=None):
        skipped = {'handler', 'command', 'config', 'verbose'}
        values = {key: value for key, value in vars(args).items() if key not in skipped}
        return cls(command=args.command, values=values, config_file=config_file)

    def to_dict(self):
        resolved = {}
        for key, value in sorted(self.values.items()):
            resolved[key] = value if isinstance(value, (int, float, str, bool, type(None))) else str(value)
        document = {
            'schema_version': self.schema_version,
            'command': self.command,
            'config_file': self.config_file,
            'resolved': resolved,
        }
        if self.extra:
            document['notes'] = dict(sorted(self.extra.items()))
        return document
