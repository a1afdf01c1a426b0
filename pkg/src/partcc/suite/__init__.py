"""Generated programs and executable composability checks."""
