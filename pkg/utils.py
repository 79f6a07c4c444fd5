import logging
import os

logger = logging.getLogger(__name__)


def ensure_dirs_exist(dirs):
    """
    Ensure that all specified directories exist.

    Args:
        dirs (list): List of directory paths
    """
    for dir_path in dirs:
        if dir_path:
            os.makedirs(dir_path, exist_ok=True)
            logger.debug(f"Ensured directory exists: {dir_path}")


def save_output(text, file_path):
    """
    Save text output (OFF mesh, JSON report) with LF line endings.

    Args:
        text (str): File contents
        file_path (str): Destination path; missing directories are created

    Returns:
        str: Path to the saved file
    """
    ensure_dirs_exist([os.path.dirname(file_path)])
    with open(file_path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text)
    logger.info(f"Saved {len(text)} characters to {file_path}")
    return file_path


def read_text(file_path):
    with open(file_path, 'r', encoding='utf-8') as f:
        return f.read()


def format_duration(seconds):
    """
    Format seconds into a human-readable duration.

    Args:
        seconds (float): Duration in seconds

    Returns:
        str: Formatted duration string
    """
    if seconds < 60:
        return f"{seconds:.3f}s"

    minutes, seconds = divmod(int(seconds), 60)
    hours, minutes = divmod(minutes, 60)

    if hours > 0:
        return f"{hours}h {minutes}m {seconds}s"
    else:
        return f"{minutes}m {seconds}s"
