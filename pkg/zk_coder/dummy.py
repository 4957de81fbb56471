"""Dummy objects."""


class DummyProgress(object):
    """Stands in for a tqdm progress bar when no progress wrapper is configured."""

    def __enter__(self):
        return self

    def __exit__(self, *args):
        pass

    def update(self, value=1):
        pass

    def set_postfix_str(self, text):
        pass
