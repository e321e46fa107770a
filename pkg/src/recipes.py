"""
Named reproduction recipes shipped under config/recipes.

A recipe is an ordinary run config; its first comment line is the
description shown by `recipes list`.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import yaml

from .errors import ConfigError

RECIPE_DIR = Path(__file__).resolve().parent.parent / 'config' / 'recipes'


@dataclass(frozen=True)
class Recipe:
    name: str
    task: str
    description: str
    path: Path


def _describe(path: Path) -> Recipe:
    text = path.read_text(encoding='utf-8')
    description = ''
    for line in text.splitlines():
        if line.startswith('#'):
            description = line.lstrip('#').strip()
            break
        if line.strip():
            break
    try:
        task = (yaml.safe_load(text) or {}).get('task', '?')
    except yaml.YAMLError:
        task = '?'
    return Recipe(path.stem, str(task), description, path)


def list_recipes(directory: Optional[Path] = None) -> List[Recipe]:
    directory = Path(directory) if directory else RECIPE_DIR
    return [_describe(p) for p in sorted(directory.glob('*.yaml'))]


def find_recipe(name: str, directory: Optional[Path] = None) -> Path:
    """Path of a recipe by name, or of an existing config file given directly"""
    candidate = Path(name)
    if candidate.suffix in ('.yaml', '.yml') and candidate.exists():
        return candidate
    directory = Path(directory) if directory else RECIPE_DIR
    path = directory / f"{name}.yaml"
    if not path.exists():
        known = ', '.join(r.name for r in list_recipes(directory))
        raise ConfigError(f"unknown recipe '{name}' (known: {known})")
    return path
