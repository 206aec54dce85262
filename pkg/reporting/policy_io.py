"""
JSON artifacts: tabular policies and neural network checkpoints, validated with jsonschema.
"""
import json
import logging
from pathlib import Path
from typing import Dict, Optional, Tuple

import jsonschema
import numpy as np

from errors import PolicyFormatError
from game_model import InfoStateKey
from neural import MlpParams, params_from_document, params_to_document
from policy import TabularPolicy

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

_PROBABILITY_TABLE = {
    "type": "object",
    "patternProperties": {
        "^([0-9a-f]{2})*$": {
            "type": "array",
            "items": {"type": "number", "minimum": 0},
            "minItems": 1,
        }
    },
    "additionalProperties": False,
}

POLICY_SCHEMA = {
    "type": "object",
    "required": ["format_version", "game", "player", "players"],
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "game": {"type": "string", "minLength": 1},
        "player": {"oneOf": [{"enum": ["joint"]}, {"enum": [0, 1]}]},
        "players": {
            "type": "object",
            "properties": {"0": _PROBABILITY_TABLE, "1": _PROBABILITY_TABLE},
            "additionalProperties": False,
            "minProperties": 1,
        },
    },
}

CHECKPOINT_SCHEMA = {
    "type": "object",
    "required": ["format_version", "game", "network"],
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "game": {"type": "string", "minLength": 1},
        "config": {"type": "object"},
        "network": {
            "type": "object",
            "required": ["activation", "layers"],
            "properties": {
                "activation": {"const": "relu"},
                "layers": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "required": ["shape", "weights", "bias"],
                        "properties": {
                            "shape": {
                                "type": "array",
                                "items": {"type": "integer", "minimum": 1},
                                "minItems": 2,
                                "maxItems": 2,
                            },
                            "weights": {"type": "array", "items": {"type": "number"}},
                            "bias": {"type": ["array", "null"], "items": {"type": "number"}},
                        },
                    },
                },
            },
        },
    },
}


def _load_json(path: Path) -> Dict:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise PolicyFormatError(f"{path}: not valid JSON ({e.msg} at line {e.lineno})") from e


def _validate(document: Dict, schema: Dict, path: Path) -> None:
    try:
        jsonschema.validate(document, schema)
    except jsonschema.ValidationError as e:
        location = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise PolicyFormatError(f"{path}: {e.message} (at {location})") from e


def policy_to_document(policy: TabularPolicy) -> Dict:
    players: Dict[str, Dict[str, list]] = {}
    for key in policy:
        players.setdefault(str(key.player), {})[key.hex()] = [float(p) for p in policy.table[key]]
    present = policy.players
    return {
        "format_version": FORMAT_VERSION,
        "game": policy.game_name,
        "player": "joint" if len(present) == 2 else present[0],
        "players": players,
    }


def save_policy(policy: TabularPolicy, output_path: Path) -> None:
    """Write a policy as JSON; probabilities round-trip exactly."""
    output_path = Path(output_path)
    logger.info(f"Writing policy: {output_path}")
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, 'w', encoding='utf-8') as f:
        json.dump(policy_to_document(policy), f, indent=2)


def load_policy(path: Path, game_name: Optional[str] = None, require_joint: bool = False) -> TabularPolicy:
    """
    Read a policy file.

    Args:
        path: JSON policy document
        game_name: when given, the document must be for this game
        require_joint: the document must cover both players

    Raises:
        PolicyFormatError: unreadable, schema-invalid or mismatched document
    """
    path = Path(path)
    document = _load_json(path)
    _validate(document, POLICY_SCHEMA, path)
    if game_name is not None and document["game"] != game_name:
        raise PolicyFormatError(f"{path}: policy is for game {document['game']!r}, not {game_name!r}")
    if require_joint and set(document["players"]) != {"0", "1"}:
        raise PolicyFormatError(f"{path}: a joint policy covering both players is required")
    table = {}
    for player, entries in document["players"].items():
        for hex_key, probs in entries.items():
            table[InfoStateKey.from_hex(int(player), hex_key)] = np.array(probs, dtype=float)
    logger.info(f"Loaded policy with {len(table)} infostates from {path}")
    return TabularPolicy(document["game"], table)


def save_checkpoint(params: MlpParams, game_name: str, output_path: Path, config: Optional[Dict] = None) -> None:
    output_path = Path(output_path)
    logger.info(f"Writing network checkpoint: {output_path}")
    document = {
        "format_version": FORMAT_VERSION,
        "game": game_name,
        "config": config or {},
        "network": params_to_document(params),
    }
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, 'w', encoding='utf-8') as f:
        json.dump(document, f)


def load_checkpoint(path: Path) -> Tuple[str, MlpParams]:
    """
    Read a network checkpoint.

    Returns:
        (game name, network parameters)

    Raises:
        PolicyFormatError: unreadable or inconsistent checkpoint
    """
    path = Path(path)
    document = _load_json(path)
    _validate(document, CHECKPOINT_SCHEMA, path)
    for layer in document["network"]["layers"]:
        rows, cols = layer["shape"]
        if len(layer["weights"]) != rows * cols:
            raise PolicyFormatError(f"{path}: layer of shape {rows}x{cols} has {len(layer['weights'])} weights")
        if layer["bias"] is not None and len(layer["bias"]) != cols:
            raise PolicyFormatError(f"{path}: bias of length {len(layer['bias'])} for {cols} outputs")
    try:
        params = params_from_document(document["network"])
    except ValueError as e:
        raise PolicyFormatError(f"{path}: {e}") from e
    return document["game"], params
