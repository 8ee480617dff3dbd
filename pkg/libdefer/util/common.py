import sys

from libdefer.util.util import count2human

def print_progress(iteration, total, prefix='', suffix='', decimals=1, bar_length=60, fill='=', stream=None):
    """
    Call in a loop to create terminal progress bar

    @params:
        iteration   - Required  : current iteration (Int)
        total       - Required  : total iterations (Int)
        prefix      - Optional  : prefix string (Str)
        suffix      - Optional  : suffix string (Str)
        decimals    - Optional  : positive number of decimals in percent complete (Int)
        bar_length  - Optional  : character length of bar (Int)
        stream      - Optional  : output stream, stderr by default
    """
    stream = stream or sys.stderr
    iteration = min(iteration, total)
    str_format = "{0:." + str(decimals) + "f}"
    percents = str_format.format(100 * (iteration / float(total)))
    filled_length = int(round(bar_length * iteration / float(total)))
    bar = fill * filled_length + '-' * (bar_length - filled_length)

    stream.write('\r%s |%s| %s%s %s' % (prefix, bar, percents, '%', suffix))

    if iteration == total:
        stream.write('\n')
    stream.flush()

def progress_printer(prefix='', stream=None):
    ''' Engine progress callback drawing the bar only on a terminal '''
    stream = stream or sys.stderr
    if not stream.isatty():
        return None
    return lambda evals, budget: print_progress(evals, budget, prefix=prefix, suffix="{}/{}".format(count2human(min(evals, budget)), count2human(budget)), stream=stream)
