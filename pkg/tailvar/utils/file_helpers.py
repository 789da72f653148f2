"""
File Helper Functions

Utility functions for file operations in tailvar.
"""

import json
import os
import logging
from typing import Dict, Any, Optional

import pandas as pd

# Configure logging
logger = logging.getLogger(__name__)

def load_json_file(file_path: str) -> Optional[Dict[str, Any]]:
    """
    Load data from a JSON file.

    Args:
        file_path: Path to the JSON file

    Returns:
        The loaded JSON data as a dictionary, or None if loading fails
    """
    try:
        with open(file_path, "r", encoding="utf-8") as file:
            return json.load(file)
    except FileNotFoundError:
        logger.error(f"File not found: {file_path}")
        return None
    except json.JSONDecodeError as e:
        logger.error(f"Failed to parse JSON file {file_path}: {str(e)}")
        return None

def save_json_file(file_path: str, data: Dict[str, Any]) -> bool:
    """
    Save data to a JSON file.

    Args:
        file_path: Path to the JSON file
        data: The data to save

    Returns:
        True if saving was successful, False otherwise
    """
    try:
        # Ensure the directory exists
        directory = os.path.dirname(os.path.abspath(file_path))
        os.makedirs(directory, exist_ok=True)

        with open(file_path, "w", encoding="utf-8") as file:
            json.dump(data, file, indent=2)
        return True
    except (OSError, TypeError, ValueError) as e:
        logger.error(f"Failed to save JSON file {file_path}: {str(e)}")
        return False

def dump_json(data: Dict[str, Any]) -> str:
    """Serialize a document the way save_json_file writes it."""
    return json.dumps(data, indent=2)

def write_table(frame: pd.DataFrame, file_path: Optional[str], fmt: str) -> str:
    """
    Render a table as CSV or aligned text, optionally writing it to a file.

    Args:
        frame: The table to render
        file_path: Destination path, or None to only return the text
        fmt: "csv" or "table"

    Returns:
        The rendered text
    """
    if fmt == "csv":
        text = frame.to_csv(index=False)
    else:
        text = frame.to_string(index=False) + "\n"

    if file_path:
        directory = os.path.dirname(os.path.abspath(file_path))
        os.makedirs(directory, exist_ok=True)
        with open(file_path, "w", encoding="utf-8") as file:
            file.write(text)
        logger.info(f"Wrote {len(frame)} rows to {file_path}")
    return text
