"""
@file: database.py
@desc: 実験の実行記録と結果を保存する SQLite レジストリ
"""

import json
import os
import sqlite3
import logging
from datetime import datetime
from typing import Any, Dict, List, Optional

# ロガー設定
logger = logging.getLogger(__name__)

SCHEMA_SQL = """
CREATE TABLE IF NOT EXISTS runs (
run_id        INTEGER PRIMARY KEY AUTOINCREMENT,
name          TEXT,
created_at    DATETIME,
status        TEXT,
config_json   TEXT,
csv_path      TEXT,
error_details TEXT
);
CREATE TABLE IF NOT EXISTS results (
run_id        INTEGER,
env           TEXT,
player        TEXT,
T             INTEGER,
n_reps        INTEGER,
mean_regret   REAL,
std_regret    REAL,
mean_switches REAL,
seed          INTEGER,
FOREIGN KEY (run_id) REFERENCES runs (run_id)
);
"""


class ExperimentDatabase:
    """実験レジストリのデータベース操作クラス"""

    def __init__(self, db_path: str = 'data/experiments.db'):
        """
        初期化

        Args:
            db_path: SQLiteデータベースファイルのパス
        """
        self.db_path = db_path
        self._ensure_db_dir()
        self._init_db()

    def _ensure_db_dir(self):
        """データベースディレクトリが存在することを確認"""
        db_dir = os.path.dirname(self.db_path)
        if db_dir and not os.path.exists(db_dir):
            os.makedirs(db_dir)

    def _get_connection(self) -> sqlite3.Connection:
        """データベース接続を取得"""
        conn = sqlite3.connect(self.db_path)
        conn.row_factory = sqlite3.Row  # 辞書形式で結果を取得
        return conn

    def _init_db(self):
        """データベースの初期化（テーブル作成）"""
        try:
            conn = self._get_connection()
            conn.executescript(SCHEMA_SQL)
            conn.commit()
            conn.close()
            logger.debug(f"データベース初期化完了: {self.db_path}")
        except Exception as e:
            logger.error(f"データベース初期化エラー: {str(e)}")
            raise

    def create_run(self, name: str, config: Dict[str, Any]) -> Optional[int]:
        """
        新しい実行記録を作成

        Args:
            name: 実験名
            config: 実験設定（JSON に変換して保存）

        Returns:
            作成されたrun_id、失敗時はNone
        """
        try:
            now = datetime.now().isoformat()
            conn = self._get_connection()
            cursor = conn.cursor()
            cursor.execute(
                """
                INSERT INTO runs (name, created_at, status, config_json)
                VALUES (?, ?, 'started', ?)
                """,
                (name, now, json.dumps(config, sort_keys=True, ensure_ascii=False))
            )
            run_id = cursor.lastrowid
            conn.commit()
            conn.close()
            return run_id
        except Exception as e:
            logger.error(f"実行記録作成エラー: {str(e)}")
            return None

    def save_results(self, run_id: int, rows: List[Dict[str, Any]]) -> int:
        """
        結果の行を一括保存

        Args:
            run_id: 実行ID
            rows: CSV と同じキーを持つ辞書のリスト

        Returns:
            保存した行数
        """
        try:
            conn = self._get_connection()
            conn.executemany(
                """
                INSERT INTO results (
                    run_id, env, player, T, n_reps,
                    mean_regret, std_regret, mean_switches, seed
                ) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)
                """,
                [
                    (
                        run_id,
                        row["env"],
                        row["player"],
                        row["T"],
                        row["n_reps"],
                        row["mean_regret"],
                        row["std_regret"],
                        row["mean_switches"],
                        row["seed"],
                    )
                    for row in rows
                ]
            )
            conn.commit()
            conn.close()
            return len(rows)
        except Exception as e:
            logger.error(f"結果保存エラー: {str(e)}")
            return 0

    def update_run_status(
        self,
        run_id: int,
        status: str,
        csv_path: Optional[str] = None,
        error_details: Optional[str] = None
    ) -> bool:
        """
        実行レコードのステータスを更新

        Args:
            run_id: 実行ID
            status: 新しいステータス（success / error など）
            csv_path: 結果 CSV のパス（完了時）
            error_details: エラー内容（失敗時）

        Returns:
            更新成功したかどうか
        """
        try:
            conn = self._get_connection()
            conn.execute(
                """
                UPDATE runs
                SET status = ?, csv_path = COALESCE(?, csv_path), error_details = COALESCE(?, error_details)
                WHERE run_id = ?
                """,
                (status, csv_path, error_details, run_id)
            )
            conn.commit()
            conn.close()
            logger.info(f"実行ID {run_id} のステータスを '{status}' に更新しました")
            return True
        except Exception as e:
            logger.error(f"実行ステータス更新エラー: {str(e)}")
            return False

    def get_run(self, run_id: int) -> Optional[Dict[str, Any]]:
        """実行レコードを取得"""
        conn = self._get_connection()
        row = conn.execute("SELECT * FROM runs WHERE run_id = ?", (run_id,)).fetchone()
        conn.close()
        return dict(row) if row else None

    def get_results(self, run_id: int) -> List[Dict[str, Any]]:
        """
        実行IDの結果を保存順に取得

        Args:
            run_id: 実行ID

        Returns:
            結果の辞書のリスト
        """
        conn = self._get_connection()
        rows = conn.execute(
            "SELECT * FROM results WHERE run_id = ? ORDER BY rowid",
            (run_id,)
        ).fetchall()
        conn.close()
        return [dict(row) for row in rows]
