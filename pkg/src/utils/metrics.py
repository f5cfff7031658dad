"""
Run metrics for hierband commands.
Records solver diagnostics and wall time, persisted as diagnostics.json.
"""

import json
from dataclasses import asdict, dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Dict, Optional

import numpy as np


@dataclass
class RunMetrics:
    """Container for one command execution."""

    run_id: str
    command: str
    start_time: datetime
    end_time: Optional[datetime] = None

    n_samples: int = 0
    n_variables: int = 0
    n_fits: int = 0

    iterations: int = 0
    converged_rows: int = 0
    total_rows: int = 0
    kkt_max: float = 0.0

    wall_time_seconds: float = 0.0
    status: str = "running"
    error_message: str = ""
    extra: Dict = field(default_factory=dict)

    def record_fit(self, fit) -> None:
        """Accumulate the diagnostics of one FitResult."""
        self.n_fits += 1
        self.iterations += int(fit.iterations)
        self.converged_rows += int(fit.converged_rows)
        self.total_rows += max(fit.p - 1, 0)
        self.kkt_max = max(self.kkt_max, float(fit.kkt_max))

    def finalize(self, status: str = "success"):
        """Stamp the end time and compute wall time."""
        if self.end_time is None:
            self.end_time = datetime.now()
        self.status = status
        self.wall_time_seconds = (self.end_time - self.start_time).total_seconds()

    def to_dict(self) -> Dict:
        """Convert metrics to a JSON-friendly dictionary."""
        data = asdict(self)
        data['start_time'] = self.start_time.isoformat()
        if self.end_time:
            data['end_time'] = self.end_time.isoformat()
        return data

    def save(self, output_dir: str, filename: str = "diagnostics.json") -> Path:
        """Save metrics to a JSON file inside output_dir."""
        output_path = Path(output_dir)
        output_path.mkdir(parents=True, exist_ok=True)
        filepath = output_path / filename

        def convert_types(obj):
            """Convert numpy scalars and arrays to Python natives."""
            if isinstance(obj, np.integer):
                return int(obj)
            if isinstance(obj, np.floating):
                return float(obj)
            if isinstance(obj, np.ndarray):
                return obj.tolist()
            return str(obj)

        with open(filepath, 'w') as f:
            json.dump(self.to_dict(), f, indent=2, default=convert_types)

        return filepath

    def get_summary(self) -> Dict:
        """Get summary statistics for console display."""
        converged = (
            f"{self.converged_rows}/{self.total_rows}"
            if self.total_rows else "n/a"
        )
        return {
            'run_id': self.run_id,
            'command': self.command,
            'status': self.status,
            'fits': self.n_fits,
            'converged_rows': converged,
            'iterations': self.iterations,
            'kkt_max': f"{self.kkt_max:.3e}",
            'wall_time': f"{self.wall_time_seconds:.2f}s",
        }


def new_run_id(command: str) -> str:
    """Timestamped identifier for a command run."""
    return f"{command}_{datetime.now().strftime('%Y%m%d_%H%M%S')}"
