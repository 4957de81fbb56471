from logging import getLogger


def logger(obj):
    """
    Logging decorator, assigning a class the `logger` property.

    The logger is named after the defining module and the class, so that it
    sits under the `zk_coder` logger hierarchy configured by the CLI:

        @logger
        class Toolchain:
            ...

        Toolchain.logger.name == "zk_coder.toolchain.Toolchain"

    """
    obj.logger = getLogger("{}.{}".format(obj.__module__, obj.__name__))
    return obj
