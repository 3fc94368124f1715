import json
from pathlib import Path

import pytest

from portrayal.synth import PlantSpec, generate_bundle


@pytest.fixture(scope="session")
def bundle(tmp_path_factory) -> Path:
    """One small planted bundle shared by the CLI tests."""
    root = tmp_path_factory.mktemp("bundle")
    spec = PlantSpec(ngrams_per_group=1500, persons_per_group=10, seed=11)
    generate_bundle(spec, root)
    return root


def variant_config(bundle: Path, name: str, **changes) -> Path:
    """Copy the bundle's config with top-level keys replaced."""
    with open(bundle / "config.json", "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    for key, value in changes.items():
        if value is None:
            payload.pop(key, None)
        else:
            payload[key] = value
    path = bundle / name
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
    return path
