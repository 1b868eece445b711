#!/usr/bin/env python3
"""
@file: main.py
@desc: 合成損失バンディットの実験 CLI（run / fit / dump-env）
"""

import os
import sys
import json
import logging
import argparse
from typing import Optional

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

# 内部モジュールのインポート
from src.db.database import ExperimentDatabase
from src.experiment.config import ConfigError, load_config
from src.experiment.fitting import MIN_FIT_POINTS, fit_exponent, read_result_points
from src.experiment.runner import dump_environment, run_experiment

# 環境変数読み込み
from dotenv import load_dotenv
load_dotenv()

# ロガー設定
logger = logging.getLogger(__name__)


def setup_logging(log_file: Optional[str] = None, log_level: int = logging.INFO):
    """ロギングの設定"""
    log_format = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    # ルートロガー設定
    logging.basicConfig(
        level=log_level,
        format=log_format
    )

    # ファイルハンドラの追加（指定がある場合）
    if log_file:
        # ディレクトリ作成
        log_dir = os.path.dirname(log_file)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)

        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(log_level)
        file_handler.setFormatter(logging.Formatter(log_format))
        logging.getLogger().addHandler(file_handler)


def parse_args(argv=None):
    """コマンドライン引数のパース"""
    # 全コマンド共通のオプション
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=None,
                        help='マスターシード（設定ファイルの値を上書き）')
    common.add_argument('--reps', type=int, default=None,
                        help='反復回数（設定ファイルの値を上書き）')
    common.add_argument('--out', type=str, default=None,
                        help='出力パスのプレフィックス（設定ファイルの値を上書き）')
    common.add_argument('--parallelism', type=int, default=None,
                        help='ワーカープロセス数（設定ファイルの値を上書き）')
    common.add_argument('--db-path', type=str,
                        default=os.environ.get('SIM_DB_PATH', 'data/experiments.db'),
                        help='SQLiteデータベースパス')
    common.add_argument('--log-file', type=str,
                        default=os.environ.get('SIM_LOG_FILE', 'data/logs/simulation.log'),
                        help='ログファイルパス')
    common.add_argument('--quiet', '-q', action='store_true',
                        help='進捗バーを表示しない')
    common.add_argument('--verbose', '-v', action='store_true',
                        help='詳細なログを出力')

    parser = argparse.ArgumentParser(description='合成損失バンディットのリグレット実験')

    subparsers = parser.add_subparsers(dest='command', help='コマンド')

    run_parser = subparsers.add_parser('run', parents=[common], help='実験を実行')
    run_parser.add_argument('config', help='実験設定ファイル（JSON）')

    fit_parser = subparsers.add_parser('fit', parents=[common], help='結果 CSV から指数をフィット')
    fit_parser.add_argument('csv', help='run が書き出した CSV')

    dump_parser = subparsers.add_parser('dump-env', parents=[common], help='実現済み環境を書き出す')
    dump_parser.add_argument('config', help='実験設定ファイル（JSON）')
    dump_parser.add_argument('--horizon', type=int, default=None,
                             help='ホライズン（省略時は最初の horizons）')
    dump_parser.add_argument('--rep', type=int, default=0,
                             help='反復番号')

    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        parser.exit(2)
    return args


def _load(args):
    config = load_config(args.config)
    return config.with_overrides(
        master_seed=args.seed,
        n_reps=args.reps,
        output=args.out,
        parallelism=args.parallelism,
    )


def run_command(args) -> bool:
    """run: 実験を実行してレジストリに記録"""
    config = _load(args)
    db = ExperimentDatabase(args.db_path)
    run_id = db.create_run(config.name, config.to_dict())
    if not run_id:
        logger.error("実行レコードの作成に失敗しました。")
        return False

    try:
        report = run_experiment(config, progress=not args.quiet)
        db.save_results(run_id, report.rows)
        db.update_run_status(run_id, "success", csv_path=report.csv_path)
        for key, fit in report.fits.items():
            if fit is not None:
                logger.info(f"{key}: 傾き={fit.slope:.4f} (残差={fit.residual:.3g})")
        return True
    except Exception as e:
        logger.exception(f"実験エラー: {str(e)}")
        db.update_run_status(run_id, "error", error_details=str(e))
        return False


def fit_command(args) -> bool:
    """fit: CSV の (環境, プレイヤー) ごとに指数を出力"""
    groups = read_result_points(args.csv)
    fits = {}
    for (env, player), points in groups.items():
        key = f"{env}|{player}"
        if len(points) < MIN_FIT_POINTS:
            logger.warning(f"{key}: 点が {len(points)} 点のためフィットしません")
            fits[key] = None
            continue
        fits[key] = fit_exponent(points).to_dict()
    print(json.dumps(fits, indent=2, ensure_ascii=False, sort_keys=True))
    return True


def dump_command(args) -> bool:
    """dump-env: 監査用に環境を書き出す"""
    config = _load(args)
    path = dump_environment(config, horizon=args.horizon, rep_index=args.rep)
    print(path)
    return True


COMMANDS = {
    'run': run_command,
    'fit': fit_command,
    'dump-env': dump_command,
}


def main(argv=None) -> int:
    """メイン関数"""
    # 引数のパース
    args = parse_args(argv)

    # ロギング設定
    log_level = logging.DEBUG if args.verbose else logging.INFO
    setup_logging(args.log_file, log_level)

    try:
        success = COMMANDS[args.command](args)
    except (ConfigError, FileNotFoundError, ValueError) as e:
        logger.error(f"設定エラー: {str(e)}")
        success = False
    except Exception as e:
        logger.exception(f"処理エラー: {str(e)}")
        success = False

    # 終了コード
    return 0 if success else 1


if __name__ == "__main__":
    sys.exit(main())
