from concurrent.futures import ThreadPoolExecutor
from typing import List, Any, Callable, Tuple


def run_fn_in_parallel(fn_args: List[Tuple[Callable, Any]], parallelism: int):
    """Run (fn, arg) pairs; results come back in submission order."""
    if parallelism <= 1:
        return [fn(args) for fn, args in fn_args]
    results = []
    with ThreadPoolExecutor(max_workers=parallelism) as executor:
        futures = [executor.submit(fn, args) for fn, args in fn_args]
        for future in futures:
            results.append(future.result())
    return results

def map_in_parallel(fn: Callable, args_list: List[Any], parallelism: int):
    return run_fn_in_parallel([(fn, args) for args in args_list], parallelism)
