

class DeferError(Exception):
    ''' Generic exception for estimation related errors '''
    def __init__(self, *args, **kwargs):
        self.node = kwargs.pop("node", None)
        self.point = kwargs.pop("point", None)
        super(DeferError, self).__init__(*args, **kwargs)

class ConfigurationError(DeferError):
    ''' Invalid domain, configuration value or target parameters '''
    pass

class CorruptTreeError(ConfigurationError):
    ''' A partition dump could not be read back '''
    def __init__(self, *args, **kwargs):
        self.line = kwargs.pop("line", None)
        super(CorruptTreeError, self).__init__(*args, **kwargs)

class OutOfDomainError(DeferError):
    pass

class DepthLimitError(DeferError):
    pass

class EvaluationError(DeferError):
    ''' The density function failed or returned an invalid value '''
    def __init__(self, *args, **kwargs):
        self.line = kwargs.pop("line", None)
        super(EvaluationError, self).__init__(*args, **kwargs)

class InvariantError(DeferError):
    ''' Internal bookkeeping went out of sync '''
    pass

class ZeroMassError(DeferError):
    ''' The approximation carries no mass where some is required '''
    pass
