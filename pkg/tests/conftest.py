import pytest
import shutil
import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from lib.odebench import write_fixtures  # noqa: E402


@pytest.fixture
def case_dir(tmp_path):
    """Shipped scenarios next to freshly generated fixtures, laid out as in the repository"""
    shutil.copytree(project_root / "scenarios", tmp_path / "scenarios")
    write_fixtures(tmp_path / "fixtures")
    return tmp_path
