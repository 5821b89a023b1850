# utils/file_handler.py

"""File handling utilities for saving analysis artifacts."""
import csv
import io
import json
import math
import os
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Sequence

from utils.number_utils import NumberUtils

TRAJECTORY_COLUMNS = ['t', 'v_ref', 'i', 'v']


def _cell(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return NumberUtils.format_sig(value)
    if isinstance(value, Enum):
        return str(value.value)
    return str(value)


def _json_ready(data: Any) -> Any:
    # json.dumps would emit the non-standard Infinity/NaN tokens
    if isinstance(data, float) and not math.isfinite(data):
        return NumberUtils.format_sig(data)
    if isinstance(data, dict):
        return {key: _json_ready(value) for key, value in data.items()}
    if isinstance(data, (list, tuple)):
        return [_json_ready(value) for value in data]
    return data


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """
    Render rows as CSV text; floats carry 9 significant digits.

    Args:
        header: Column names
        rows: Row values in header order

    Returns:
        str: CSV text with '\\n' line endings
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(value) for value in row])
    return buffer.getvalue()


def render_json(data: Any) -> str:
    """JSON text in schema field order; non-finite floats become "inf", "-inf" or "nan"."""
    return json.dumps(_json_ready(data), indent=2, ensure_ascii=False) + '\n'


class FileHandler:
    """Write JSON, CSV, trajectories and sweep manifests."""

    def __init__(self, output_dir: str = "results"):
        """
        Initialize file handler.

        Args:
            output_dir: Directory for relative file names
        """
        self.output_dir = output_dir
        os.makedirs(output_dir, exist_ok=True)

    def _path(self, filename: str) -> str:
        path = filename if os.path.isabs(filename) else os.path.join(self.output_dir, filename)
        folder = os.path.dirname(path)
        if folder:
            os.makedirs(folder, exist_ok=True)
        return path

    def save_text(self, text: str, filename: str) -> str:
        """
        Save already rendered text.

        Returns:
            str: Full path to saved file
        """
        filepath = self._path(filename)
        with open(filepath, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
        return filepath

    def save_json(self, data: Any, filename: str) -> str:
        """
        Save data to a JSON file.

        Args:
            data: JSON-ready data (dicts, lists, numbers, strings)
            filename: File name, relative to output_dir unless absolute

        Returns:
            str: Full path to saved file
        """
        return self.save_text(render_json(data), filename)

    def save_csv(self, header: Sequence[str], rows: Iterable[Sequence[Any]], filename: str) -> str:
        """
        Save rows to a CSV file with a fixed column order.

        Args:
            header: Column names
            rows: Row values
            filename: File name

        Returns:
            str: Full path to saved file
        """
        return self.save_text(render_csv(header, rows), filename)

    def save_trajectory(self, trajectory, filename: str) -> Dict[str, str]:
        """
        Save a trajectory as `t,v_ref,i,v` CSV plus a JSON sidecar with its verdict.

        Args:
            trajectory: Simulated Trajectory
            filename: CSV file name; the sidecar replaces the extension with .json

        Returns:
            Dict with 'csv' and 'json' paths
        """
        csv_path = self.save_csv(TRAJECTORY_COLUMNS, trajectory.samples.tolist(), filename)
        sidecar = os.path.splitext(filename)[0] + '.json'
        return {'csv': csv_path, 'json': self.save_json(trajectory.metadata(), sidecar)}

    def save_sweep(self, header: Sequence[str], rows: Iterable[Sequence[Any]], filename: str,
                   manifest: Dict[str, Any]) -> Dict[str, str]:
        """
        Save sweep rows and a manifest describing the grid.

        Args:
            header: CSV column names
            rows: Row values
            filename: CSV file name; the manifest goes to <stem>.manifest.json
            manifest: Grid definition, fixed parameters and version

        Returns:
            Dict with 'csv' and 'manifest' paths
        """
        csv_path = self.save_csv(header, rows, filename)
        manifest_name = os.path.splitext(filename)[0] + '.manifest.json'
        return {'csv': csv_path, 'manifest': self.save_json(manifest, manifest_name)}


def render_summary(stats: Dict[str, Any], title: str = "ANALYSIS SUMMARY",
                   footer: Optional[str] = None) -> str:
    """Emoji-marked text block used by the human output format."""
    lines: List[str] = [f"📊 {title}", "=" * 80]
    for label, value in stats.items():
        if isinstance(value, dict):
            lines.append(f"{label}:")
            lines.extend(f"  - {key}: {_human(item)}" for key, item in value.items())
        else:
            lines.append(f"{label}: {_human(value)}")
    lines.append("=" * 80)
    if footer:
        lines.append(footer)
    return '\n'.join(lines) + '\n'


def _human(value: Any) -> str:
    if isinstance(value, float):
        return NumberUtils.format_sig(value, 6)
    if isinstance(value, list):
        return ', '.join(_human(item) for item in value)
    return _cell(value)
