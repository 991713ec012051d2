"""
CSV export for run logs, reports, plot series and embedding matrices.
"""

import csv
import json
from pathlib import Path
from typing import List, Dict, Any, Optional, Sequence

import numpy as np

from ..core.logger import get_logger


class CSVExporter:
    """
    Export records to CSV with consistent formatting.
    Floats are written at full ``repr`` precision.
    """

    def __init__(
        self,
        output_dir: str = "runs",
        encoding: str = "utf-8",
        delimiter: str = ",",
        quotechar: str = '"',
    ):
        """
        Initialize CSV exporter.

        Args:
            output_dir: Directory for output files
            encoding: File encoding
            delimiter: CSV delimiter
            quotechar: Quote character
        """
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

        self.encoding = encoding
        self.delimiter = delimiter
        self.quotechar = quotechar

        self.logger = get_logger(__name__)

    def _normalize_value(self, value: Any) -> str:
        """
        Normalize value for CSV export.

        Args:
            value: Value to normalize

        Returns:
            String representation
        """
        if value is None:
            return ""

        if isinstance(value, bool):
            return "1" if value else "0"

        if isinstance(value, (float, np.floating)):
            return repr(float(value))

        if isinstance(value, (list, tuple)):
            return "; ".join(str(v) for v in value)

        if isinstance(value, dict):
            return json.dumps(value, sort_keys=True)

        return str(value).strip()

    def export(
        self,
        data: List[Dict[str, Any]],
        filename: str,
        fieldnames: Optional[List[str]] = None,
        append: bool = False,
    ) -> Path:
        """
        Export data to CSV file.

        Args:
            data: List of dictionaries to export
            filename: Output filename, relative to the output directory
            fieldnames: Column names (auto-detected if None)
            append: Append to existing file

        Returns:
            Path to created file
        """
        output_path = self.output_dir / filename
        if not data:
            self.logger.warning(f"No data to export for {filename}")
            return output_path

        # Auto-detect fieldnames from first record
        if fieldnames is None:
            fieldnames = list(data[0].keys())

        output_path.parent.mkdir(parents=True, exist_ok=True)
        mode = 'a' if append and output_path.exists() else 'w'
        write_header = mode == 'w'

        try:
            with open(output_path, mode, encoding=self.encoding, newline='') as f:
                writer = csv.DictWriter(
                    f,
                    fieldnames=fieldnames,
                    delimiter=self.delimiter,
                    quotechar=self.quotechar,
                    quoting=csv.QUOTE_MINIMAL,
                    extrasaction='ignore',  # Ignore extra fields
                )

                if write_header:
                    writer.writeheader()

                for row in data:
                    normalized_row = {
                        k: self._normalize_value(v)
                        for k, v in row.items()
                        if k in fieldnames
                    }
                    writer.writerow(normalized_row)

            action = "Appended" if mode == 'a' else "Exported"
            self.logger.info(f"{action} {len(data)} records to {output_path}")
            return output_path

        except OSError as e:
            self.logger.error(f"Failed to export {filename}: {e}")
            raise

    def export_matrix(
        self,
        ids: Sequence[str],
        targets: Sequence[float],
        matrix: np.ndarray,
        filename: str,
        prefix: str = "h",
    ) -> Path:
        """
        Export an embedding matrix as ``id, target, h_0 ... h_{m-1}``.

        Args:
            ids: Row identifiers
            targets: Row targets (NaN written as empty)
            matrix: N x m array
            filename: Output filename
            prefix: Column prefix for the matrix columns

        Returns:
            Path to created file
        """
        columns = [f"{prefix}_{j}" for j in range(matrix.shape[1])]
        rows = []
        for row_id, target, values in zip(ids, targets, matrix):
            record = {"id": row_id, "target": None if target != target else float(target)}
            record.update(zip(columns, values.tolist()))
            rows.append(record)
        return self.export(rows, filename, fieldnames=["id", "target", *columns])
