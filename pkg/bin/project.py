#!/usr/bin/env python3
"""
@file: project.py
@desc: 実験環境の準備・実験実行・テスト実行をまとめた管理スクリプト
"""

import os
import sys
import shutil
import argparse
import subprocess
import logging
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parent.parent
DATA_DIRS = ('data/output', 'data/logs')

# ロガー設定
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)


def setup_env() -> bool:
    """出力ディレクトリと config/.env を用意し、実験レジストリを作成"""
    for name in DATA_DIRS:
        (PROJECT_ROOT / name).mkdir(parents=True, exist_ok=True)

    env_file = PROJECT_ROOT / 'config' / '.env'
    if not env_file.exists():
        shutil.copyfile(PROJECT_ROOT / 'config' / '.env.example', env_file)
        logger.info(f"既定値ファイルを作成しました: {env_file}")

    sys.path.insert(0, str(PROJECT_ROOT))
    from src.db.database import ExperimentDatabase

    db_path = PROJECT_ROOT / os.environ.get('SIM_DB_PATH', 'data/experiments.db')
    try:
        ExperimentDatabase(str(db_path))
    except Exception as e:
        logger.error(f"実験レジストリを作成できません: {db_path} ({str(e)})")
        return False
    logger.info(f"実験レジストリ: {db_path}")
    return True


def run_experiment(config: str, reps) -> int:
    """src/main.py run を子プロセスで実行"""
    cmd = [sys.executable, str(PROJECT_ROOT / 'src' / 'main.py'), 'run', config]
    if reps is not None:
        cmd += ['--reps', str(reps)]
    logger.info(f"実行コマンド: {' '.join(cmd)}")
    return subprocess.run(cmd, cwd=str(PROJECT_ROOT)).returncode


def run_tests(runslow: bool) -> int:
    """pytest を実行（runslow で受け入れ規模の実験も含める）"""
    cmd = [sys.executable, '-m', 'pytest', '-xvs', 'tests']
    if runslow:
        cmd.append('--runslow')
    return subprocess.run(cmd, cwd=str(PROJECT_ROOT)).returncode


def main() -> int:
    parser = argparse.ArgumentParser(description='合成損失バンディット実験 プロジェクト管理')
    subparsers = parser.add_subparsers(dest='command', required=True)

    subparsers.add_parser('setup', help='ディレクトリ・.env・実験レジストリを用意')

    run_parser = subparsers.add_parser('run', help='実験設定ファイルを実行')
    run_parser.add_argument('config', help='例: config/experiments/linear_easy.json')
    run_parser.add_argument('--reps', type=int, default=None, help='反復回数の上書き')

    test_parser = subparsers.add_parser('test', help='テスト実行')
    test_parser.add_argument('--runslow', action='store_true', help='受け入れ規模の実験も実行')

    args = parser.parse_args()

    if args.command == 'setup':
        return 0 if setup_env() else 1
    if args.command == 'run':
        return run_experiment(args.config, args.reps)
    return run_tests(args.runslow)


if __name__ == "__main__":
    sys.exit(main())
