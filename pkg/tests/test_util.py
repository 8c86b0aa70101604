import logging

import numpy as np
import pytest

import impl.lipan.filesystem
import impl.lipan.util

log = logging.getLogger(__name__)


class TestUtil:
    def test_1000(self):
        """as_points shapes single points and point lists."""
        assert impl.lipan.util.as_points(0.5).shape == (1, 1)
        assert impl.lipan.util.as_points([0.1, 0.2], 2).shape == (1, 2)
        assert impl.lipan.util.as_points([0.1, 0.2, 0.3], 1).shape == (3, 1)
        assert impl.lipan.util.as_points([[0.1, 0.2]]).shape == (1, 2)
        with pytest.raises(ValueError):
            impl.lipan.util.as_points([[0.1, 0.2]], 3)

    def test_1010(self):
        """to_builtin converts numpy values and non-finite floats."""
        d = impl.lipan.util.to_builtin(
            {
                1: np.array([1.5, 2.0]),
                'b': (np.int64(3), np.bool_(True)),
                'c': float('-inf'),
                'd': np.float32(0.5),
            }
        )
        assert d == {'1': [1.5, 2.0], 'b': [3, True], 'c': '-inf', 'd': 0.5}
        assert type(d['b'][0]) is int


class TestFilesystem:
    @pytest.mark.parametrize(
        'name,expected',
        [
            ('theorem1', 'theorem1'),
            ('a/b', 'a%2Fb'),
            ('.hidden', '%2ehidden'),
        ],
    )
    def test_1000(self, name, expected):
        """Path elements are escaped reversibly."""
        assert impl.lipan.filesystem.get_safe_reversible_path_element(name) == expected

    def test_1010(self, tmp_path):
        """write_text_atomic creates parents, replaces existing files and leaves no
        temporary file behind.
        """
        path = tmp_path / 'a' / 'b' / 'report.json'
        impl.lipan.filesystem.write_text_atomic(path, 'one')
        impl.lipan.filesystem.write_text_atomic(path, 'two')
        assert path.read_text() == 'two'
        assert [p.name for p in path.parent.iterdir()] == ['report.json']

    def test_1020(self, tmp_path):
        """A file in the way of a directory raises IOError."""
        blocker = tmp_path / 'x'
        blocker.write_text('')
        with pytest.raises(IOError):
            impl.lipan.filesystem.create_missing_directories_for_dir(blocker)
