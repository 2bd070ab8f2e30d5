# Tests for parsimax
