#include <stdio.h>
#include "billiard_fem.h"

int main(void) {
    BfRegion *region = NULL;
    if (bf_region_new("circle r=1", &region) != BF_STATUS_OK) {
        fprintf(stderr, "%s\n", bf_last_error_message());
        return 1;
    }
    BfSolveParams p = bf_solve_params_default();
    p.h = 0.01;
    p.num_states = 4;
    BfSolution *sol = NULL;
    if (bf_solve(region, &p, &sol) != BF_STATUS_OK) {
        fprintf(stderr, "%s\n", bf_last_error_message());
        bf_region_free(region);
        return 1;
    }
    double k[4];
    size_t n = 0;
    bf_solution_wavenumbers(sol, k, 4, &n);
    for (size_t i = 0; i < n; i++) printf("%zu %.6f\n", i + 1, k[i]);
    bf_solution_free(sol);
    bf_region_free(region);
    return 0;
}
