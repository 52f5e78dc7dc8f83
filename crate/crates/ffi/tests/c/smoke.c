#include <math.h>
#include <stdio.h>

#include "graphsteer.h"

int main(void) {
    GsState *state = NULL;
    if (gs_state_build(GS_FAMILY_FOURMODE, 0.5, 0.345, &state) != GS_STATUS_OK) {
        fprintf(stderr, "build: %s\n", gs_last_error_message());
        return 1;
    }
    size_t n = 0;
    gs_state_info(state, &n, NULL, NULL);
    double cov[64];
    size_t written = 0;
    if (gs_state_covariance(state, cov, 64, &written) != GS_STATUS_OK || written != 4 * n * n) {
        return 2;
    }
    size_t a[] = {0}, cd[] = {2, 3};
    double g = -1.0;
    bool reg = true;
    if (gs_steering(state, cd, 2, a, 1, &g, &reg) != GS_STATUS_OK) {
        return 3;
    }
    gs_state_free(state);
    GsState *other = NULL;
    GsStatus bad = gs_state_build(GS_FAMILY_TRIPARTITE, 2.0, 0.345, &other);
    if (other != NULL) {
        return 4;
    }
    printf("n=%zu cov00=%.12f g=%.12e regularized=%d bad=%d msg=%s\n",
           n, cov[0], g, (int)reg, (int)bad, gs_last_error_message());
    return 0;
}
