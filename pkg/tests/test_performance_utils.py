from pathlib import Path
from unittest.mock import MagicMock, patch

import psutil
import pytest

from app.utils.performance_utils import RunMonitor


def _thread_running_target(mock_thread, alive):
    """Thread mock whose start() runs the target synchronously"""
    mock_thread_instance = MagicMock()

    def build(target):
        mock_thread_instance.start.side_effect = target
        return mock_thread_instance

    mock_thread.side_effect = build
    mock_thread_instance.is_alive.side_effect = alive
    return mock_thread_instance


@pytest.fixture
def run_monitor(tmp_path):
    """RunMonitor writing its logs below tmp_path, with the logger mocked"""
    with patch("app.utils.performance_utils.logger") as mock_logger:
        monitor = RunMonitor(out_dir=tmp_path)
        yield monitor, mock_logger


class TestRunMonitorInitialization:
    """Tests for RunMonitor initialization"""

    def test_log_directory_created(self, run_monitor, tmp_path):
        monitor, _ = run_monitor
        assert monitor.log_dir == tmp_path / "logs"
        assert monitor.log_dir.is_dir()

    def test_default_directory_from_environment(self, tmp_path, monkeypatch):
        """Without out_dir the configured output directory is used"""
        monkeypatch.setenv("SUBCRITICAL_GK_OUTPUT_DIR", str(tmp_path / "env"))
        with patch("app.utils.performance_utils.logger"):
            monitor = RunMonitor()
        assert monitor.log_dir == tmp_path / "env" / "logs"

    def test_logging_setup(self, tmp_path):
        """stderr and file sinks, thread id in the format"""
        with (
            patch("app.utils.performance_utils.logger") as mock_logger,
            patch("threading.get_ident", return_value=12345),
        ):
            RunMonitor(out_dir=tmp_path)

            assert mock_logger.remove.called
            assert mock_logger.add.call_count == 2
            format_call = mock_logger.add.call_args_list[0][1]["format"]
            assert "TID-12345" in format_call
            assert mock_logger.add.call_args_list[0][1]["level"] == "INFO"
            assert mock_logger.add.call_args_list[1][0][0] == str(tmp_path / "logs" / "subcritical_gk.log")

    def test_verbose_logs_debug(self, tmp_path):
        with patch("app.utils.performance_utils.logger") as mock_logger:
            RunMonitor(out_dir=tmp_path, verbose=True)
            assert mock_logger.add.call_args_list[0][1]["level"] == "DEBUG"

    def test_directory_setup_with_mocked_mkdir(self):
        with patch("pathlib.Path.mkdir") as mock_mkdir, patch("app.utils.performance_utils.logger"):
            monitor = RunMonitor(out_dir=Path("/fake/out"))
            assert monitor.log_dir == Path("/fake/out/logs")
            mock_mkdir.assert_called_once_with(parents=True, exist_ok=True)


class TestMeasurePerformance:
    """Tests for measure_performance static method"""

    @patch("threading.Thread")
    @patch("time.perf_counter")
    @patch("time.sleep")
    @patch("psutil.Process")
    def test_basic_measurement(self, mock_process, mock_sleep, mock_perf_counter, mock_thread):
        """Result, elapsed time and memory above baseline"""
        mock_thread_instance = _thread_running_target(mock_thread, [True, True, False])
        mock_perf_counter.side_effect = [10.0, 15.0]

        mock_parent_process = MagicMock()
        mock_process.return_value = mock_parent_process
        mock_parent_process.children.return_value = []
        mock_parent_process.memory_info.side_effect = [
            MagicMock(rss=1000),
            MagicMock(rss=1500),
            MagicMock(rss=2000),
        ]

        result, elapsed, peak, timeline = RunMonitor.measure_performance(lambda: 42)

        mock_thread_instance.start.assert_called_once()
        mock_thread_instance.join.assert_called_once()
        assert result == 42
        assert elapsed == 5.0
        assert peak == 1000
        assert timeline == [1000, 1500, 2000]
        assert mock_sleep.call_count == 2

    @patch("threading.Thread")
    @patch("time.perf_counter")
    @patch("time.sleep")
    @patch("psutil.Process")
    def test_with_child_processes(self, mock_process, mock_sleep, mock_perf_counter, mock_thread):
        """Census worker processes count towards the memory reading"""
        _thread_running_target(mock_thread, [True, False])
        mock_perf_counter.side_effect = [10.0, 15.0]

        mock_parent_process = MagicMock()
        mock_process.return_value = mock_parent_process
        mock_parent_process.memory_info.return_value.rss = 1000
        child1 = MagicMock()
        child1.memory_info.return_value.rss = 500
        child2 = MagicMock()
        child2.memory_info.return_value.rss = 300
        mock_parent_process.children.return_value = [child1, child2]

        _, _, peak, timeline = RunMonitor.measure_performance(MagicMock())

        mock_parent_process.children.assert_called_with(recursive=True)
        assert timeline[0] == 1800
        assert peak == 0

    @patch("threading.Thread")
    @patch("time.perf_counter")
    @patch("time.sleep")
    @patch("psutil.Process")
    def test_vanished_child_is_skipped(self, mock_process, mock_sleep, mock_perf_counter, mock_thread):
        _thread_running_target(mock_thread, [False])
        mock_perf_counter.side_effect = [1.0, 2.0]
        mock_parent_process = MagicMock()
        mock_process.return_value = mock_parent_process
        mock_parent_process.memory_info.return_value.rss = 1000
        gone = MagicMock()
        gone.memory_info.side_effect = psutil.NoSuchProcess(pid=99)
        mock_parent_process.children.return_value = [gone]

        _, _, _, timeline = RunMonitor.measure_performance(MagicMock())
        assert timeline == [1000]

    @patch("threading.Thread")
    @patch("time.perf_counter")
    @patch("time.sleep")
    @patch("psutil.Process")
    def test_memory_error_handling(self, mock_process, mock_sleep, mock_perf_counter, mock_thread):
        """A failed memory reading is logged and recorded as 0"""
        _thread_running_target(mock_thread, [True, False])
        mock_perf_counter.side_effect = [10.0, 15.0]

        mock_parent_process = MagicMock()
        mock_process.return_value = mock_parent_process
        mock_parent_process.memory_info = MagicMock(side_effect=[MagicMock(rss=1000), Exception("Test exception")])
        mock_parent_process.children.return_value = []

        with patch("app.utils.performance_utils.logger") as mock_logger:
            _, elapsed, peak, timeline = RunMonitor.measure_performance(MagicMock())

            assert mock_logger.exception.call_count == 1
            assert elapsed == 5.0
            assert peak == 0
            assert timeline == [1000, 0]

    @patch("threading.Thread")
    @patch("time.perf_counter")
    @patch("time.sleep")
    @patch("psutil.Process")
    def test_runnable_error_is_reraised(self, mock_process, mock_sleep, mock_perf_counter, mock_thread):
        _thread_running_target(mock_thread, [False])
        mock_perf_counter.side_effect = [10.0, 11.0]
        mock_process.return_value.memory_info.return_value.rss = 1000
        mock_process.return_value.children.return_value = []

        def failing():
            raise ArithmeticError("diverged")

        with pytest.raises(ArithmeticError, match="diverged"):
            RunMonitor.measure_performance(failing)

    def test_real_thread(self):
        """Without mocks the runnable's value comes back and the timeline starts at the baseline"""
        result, elapsed, peak, timeline = RunMonitor.measure_performance(lambda: sum(range(1000)))
        assert result == 499500
        assert elapsed >= 0
        assert peak >= 0
        assert timeline and timeline[0] > 0
