"""Text formatting and display utilities for the command line."""

import sys


class Formatter:
    """Handles console formatting; ANSI colors only on terminals."""

    def __init__(self, use_color=None):
        # None means decide per stream
        self.use_color = use_color
        self.colors = {
            'reset': '\033[0m',
            'bold': '\033[1m',
            'red': '\033[91m',
            'green': '\033[92m',
            'yellow': '\033[93m',
            'cyan': '\033[96m',
            'gray': '\033[90m',
        }
        self._active = bool(use_color)

    def _wrap(self, text, color):
        if not self._active:
            return str(text)
        return f"{self.colors[color]}{text}{self.colors['reset']}"

    def format_header(self, text):
        """Format headers with bold"""
        return self._wrap(text, 'bold')

    def format_success(self, text):
        """Format success messages"""
        return self._wrap(text, 'green')

    def format_error(self, text):
        """Format error messages"""
        return self._wrap(text, 'red')

    def format_metric(self, name, value, unit=""):
        """Format a named number, e.g. 'EFMQE(10): 0.0021'"""
        if isinstance(value, float):
            shown = f"{value:.4g}"
        else:
            shown = str(value)
        suffix = f" {unit}" if unit else ""
        return f"{self._wrap(name, 'cyan')}: {shown}{suffix}"

    def format_table(self, headers, rows):
        """Left-aligned plain table; floats shown with 4 significant digits"""
        cells = [[f"{v:.4g}" if isinstance(v, float) else str(v) for v in row] for row in rows]
        widths = [len(h) for h in headers]
        for row in cells:
            widths = [max(w, len(c)) for w, c in zip(widths, row)]
        lines = [self.format_header("  ".join(h.ljust(w) for h, w in zip(headers, widths)))]
        lines.append("  ".join("-" * w for w in widths))
        lines.extend("  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in cells)
        return "\n".join(lines)

    def emit(self, message, stream=None):
        """Write a message to a stream (stdout by default)"""
        stream = stream or sys.stdout
        try:
            stream.write(str(message) + "\n")
            stream.flush()
        except (OSError, ValueError) as e:
            print(f"Error writing output: {e}", file=sys.stderr)

    def for_stream(self, stream):
        """Enable colors when the stream is a terminal, unless fixed at construction"""
        if self.use_color is None:
            isatty = getattr(stream, "isatty", None)
            self._active = bool(isatty and isatty())
        return self
