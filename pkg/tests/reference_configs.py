"""Reference configurations and their expected execution times; k = 100 throughout."""
LINEAR_M = [10 * (i - 1) + 1 for i in range(1, 22)]
SQUARE_M = [i * i for i in range(1, 18)]
EXPONENTIAL_M = [2 ** (i - 1) for i in range(1, 11)]
OPTIMAL_M = [1, 2, 19, 21, 23, 24, 25, 26, 27, 28, 29, 51, 52, 105, 195, 369]
OPTIMAL_N = [8, 5, 5, 5, 6, 6, 5, 6, 6, 7, 5, 5, 5, 5, 8, 12]
IDENTICAL_M = [1, 2, 3, 4, 5, 12, 20, 23, 24, 25, 26, 27, 28, 29, 30, 31, 32, 33, 34, 35,
               36, 37, 38, 39, 53, 92, 136, 181, 227, 276, 329, 385, 445]

# (name, m, n, expected seconds)
TIME_ROWS = [
    ("linear", LINEAR_M, [5] * 21, 3.261),
    ("square", SQUARE_M, [6] * 17, 3.193),
    ("exponential", EXPONENTIAL_M, [10] * 10, 3.114),
    ("optimal", OPTIMAL_M, OPTIMAL_N, 2.974),
    ("optimal-identical-n", IDENTICAL_M, [3] * 33, 2.961),
]
