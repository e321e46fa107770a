"""
sqlite registry of CLI runs.

One row per run id (the config hash prefix) with task, status, exit code and
wall time. Every method logs and swallows database errors so bookkeeping
never fails a run.
"""

import os
import sqlite3
from datetime import datetime
from typing import Any, Dict, List, Optional

from .logging_config import get_logger

logger = get_logger(__name__)

REGISTRY_ENV = 'FLOQUET_REGISTRY'
DEFAULT_REGISTRY = 'floquet_runs.db'


class RunRegistry:
    """sqlite record of CLI runs; failures are logged and never fail a run"""

    def __init__(self, db_path: Optional[str] = None):
        self.db_path = db_path or os.getenv(REGISTRY_ENV, DEFAULT_REGISTRY)
        self.init_database()

    def init_database(self):
        """Initialize database with required tables"""
        try:
            with sqlite3.connect(self.db_path) as conn:
                cursor = conn.cursor()

                cursor.execute("""
                    CREATE TABLE IF NOT EXISTS runs (
                        run_id TEXT PRIMARY KEY,
                        task TEXT NOT NULL,
                        config_path TEXT,
                        config_hash TEXT NOT NULL,
                        output_dir TEXT,
                        status TEXT DEFAULT 'running',
                        exit_code INTEGER,
                        error TEXT,
                        wall_time REAL,
                        started_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP,
                        finished_at TIMESTAMP
                    )
                """)

                cursor.execute("""
                    CREATE INDEX IF NOT EXISTS idx_runs_started
                    ON runs(started_at)
                """)

                conn.commit()
                logger.debug("Run registry initialized")
        except Exception as e:
            logger.error(f"Error initializing run registry: {e}")

    def start_run(self, run_id: str, task: str, config_hash: str,
                  config_path: str = None, output_dir: str = None) -> bool:
        """Record a run as started; a rerun of the same id restarts its row"""
        try:
            with sqlite3.connect(self.db_path) as conn:
                cursor = conn.cursor()
                cursor.execute("""
                    INSERT OR REPLACE INTO runs
                    (run_id, task, config_path, config_hash, output_dir, status, started_at)
                    VALUES (?, ?, ?, ?, ?, 'running', ?)
                """, (run_id, task, config_path, config_hash, output_dir, datetime.now()))
                conn.commit()
                return True
        except Exception as e:
            logger.error(f"Error recording run start: {e}")
            return False

    def finish_run(self, run_id: str, status: str, exit_code: int,
                   wall_time: float, error: str = None) -> bool:
        """Record the outcome of a run"""
        try:
            with sqlite3.connect(self.db_path) as conn:
                cursor = conn.cursor()
                cursor.execute("""
                    UPDATE runs
                    SET status = ?, exit_code = ?, wall_time = ?, error = ?, finished_at = ?
                    WHERE run_id = ?
                """, (status, exit_code, wall_time, error, datetime.now(), run_id))
                conn.commit()
                return cursor.rowcount > 0
        except Exception as e:
            logger.error(f"Error recording run finish: {e}")
            return False

    def get_run(self, run_id: str) -> Optional[Dict[str, Any]]:
        try:
            with sqlite3.connect(self.db_path) as conn:
                conn.row_factory = sqlite3.Row
                cursor = conn.cursor()
                cursor.execute("SELECT * FROM runs WHERE run_id = ?", (run_id,))
                result = cursor.fetchone()
                return dict(result) if result else None
        except Exception as e:
            logger.error(f"Error getting run: {e}")
            return None

    def recent_runs(self, limit: int = 20, task: str = None) -> List[Dict[str, Any]]:
        """Most recent runs first, optionally for one task"""
        try:
            with sqlite3.connect(self.db_path) as conn:
                conn.row_factory = sqlite3.Row
                cursor = conn.cursor()
                if task:
                    cursor.execute("""
                        SELECT * FROM runs WHERE task = ?
                        ORDER BY started_at DESC LIMIT ?
                    """, (task, limit))
                else:
                    cursor.execute("""
                        SELECT * FROM runs ORDER BY started_at DESC LIMIT ?
                    """, (limit,))
                return [dict(row) for row in cursor.fetchall()]
        except Exception as e:
            logger.error(f"Error listing runs: {e}")
            return []

    def get_stats(self) -> Dict[str, Any]:
        """Run counts per status and per task"""
        try:
            with sqlite3.connect(self.db_path) as conn:
                cursor = conn.cursor()
                cursor.execute("SELECT status, COUNT(*) FROM runs GROUP BY status")
                by_status = dict(cursor.fetchall())
                cursor.execute("SELECT task, COUNT(*) FROM runs GROUP BY task")
                by_task = dict(cursor.fetchall())
                return {
                    'total_runs': sum(by_status.values()),
                    'by_status': by_status,
                    'by_task': by_task,
                }
        except Exception as e:
            logger.error(f"Error getting run stats: {e}")
            return {}
