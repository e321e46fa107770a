"""
Unit tests for structured logging.
"""

import json
import logging

import pytest

from src.logging_config import (
    JSONFormatter, RunIDFilter, TextFormatter, clear_run_id, get_logger, log_with_context,
    set_run_id, setup_logging,
)


def make_record(message='Task started', level=logging.INFO, **attrs):
    record = logging.LogRecord('src.test', level, __file__, 10, message, None, None)
    for key, value in attrs.items():
        setattr(record, key, value)
    return record


@pytest.mark.unit
class TestFormatters:
    """Test suite for JSON and text formatters"""

    def test_json_includes_context(self):
        """Test run ID, task and extra fields appear in JSON output"""
        record = make_record(run_id='abc123', task='g2', extra_fields={'rows': 64})

        data = json.loads(JSONFormatter().format(record))

        assert data['message'] == 'Task started'
        assert data['run_id'] == 'abc123'
        assert data['task'] == 'g2'
        assert data['rows'] == 64
        assert data['timestamp'].endswith('Z')

    def test_json_debug_has_location(self):
        """Test DEBUG records carry module and line"""
        data = json.loads(JSONFormatter().format(make_record(level=logging.DEBUG)))

        assert data['line'] == 10
        assert 'function' in data

    def test_text_without_colors(self):
        """Test text output lists context and extra fields"""
        record = make_record(run_id='abc123', task='ramsey', extra_fields={'points': 200})

        line = TextFormatter(use_colors=False).format(record)

        assert '[task:ramsey | run:abc123]' in line
        assert '(points=200)' in line
        assert '\033[' not in line


@pytest.mark.unit
class TestRunContext:
    """Test suite for run ID propagation"""

    def test_filter_reads_context(self):
        """Test the filter stamps the active run ID"""
        set_run_id('run42')
        try:
            record = make_record()
            RunIDFilter().filter(record)
            assert record.run_id == 'run42'
        finally:
            clear_run_id()

    def test_filter_after_clear(self):
        """Test no run ID is attached once cleared"""
        clear_run_id()
        record = make_record()
        RunIDFilter().filter(record)

        assert record.run_id is None

    def test_log_with_context(self, caplog):
        """Test task and extra fields travel on the record"""
        logger = get_logger('src.test_context')
        with caplog.at_level(logging.INFO, logger='src.test_context'):
            log_with_context(logger, logging.INFO, "Run complete", task='map', status='ok')

        record = caplog.records[-1]
        assert record.task == 'map'
        assert record.extra_fields == {'status': 'ok'}

    def test_setup_logging_json(self, monkeypatch, tmp_path):
        """Test setup_logging installs the requested formatter"""
        monkeypatch.delenv('LOG_FILE', raising=False)
        setup_logging('DEBUG', 'json', str(tmp_path / 'run.log'))
        try:
            root = logging.getLogger()
            assert root.level == logging.DEBUG
            assert all(isinstance(h.formatter, JSONFormatter) for h in root.handlers)
            assert len(root.handlers) == 2
        finally:
            for handler in logging.getLogger().handlers:
                handler.close()
            logging.basicConfig(handlers=[logging.NullHandler()], force=True)

    def test_container_defaults(self, monkeypatch):
        """Test CONTAINER_ENV switches to JSON on stderr only"""
        monkeypatch.setenv('CONTAINER_ENV', 'true')
        monkeypatch.delenv('LOG_FILE', raising=False)
        monkeypatch.delenv('LOG_FORMAT', raising=False)
        setup_logging('INFO')
        try:
            handlers = logging.getLogger().handlers
            assert len(handlers) == 1
            assert isinstance(handlers[0].formatter, JSONFormatter)
            assert any(isinstance(f, RunIDFilter) for f in handlers[0].filters)
        finally:
            logging.basicConfig(handlers=[logging.NullHandler()], force=True)
