#include <math.h>
#include <stdio.h>

#include "s2m.h"

int main(void) {
    S2mProblem *problem = NULL;
    if (s2m_problem_new(0.0, 1.0, "{\"type\":\"zero\"}", 0, &problem) != S2M_STATUS_OK) {
        fprintf(stderr, "problem: %s\n", s2m_last_error());
        return 1;
    }
    double eig[3];
    if (s2m_dirichlet_eigenvalues(problem, 3, eig, 3) != S2M_STATUS_OK) {
        return 1;
    }
    double pi = acos(-1.0);
    for (int k = 0; k < 3; k++) {
        double exact = (k + 1) * (k + 1) * pi * pi;
        if (fabs(eig[k] - exact) > 1e-8 * exact) {
            return 2;
        }
    }

    S2mSpectraPair *pair = NULL;
    if (s2m_pair_new_free(0.0, 1.0, 0.5, 4000, &pair) != S2M_STATUS_OK) {
        return 1;
    }
    double c = 0.0, esq = 0.0, tail = 0.0;
    if (s2m_pair_normalization(pair, S2M_METHOD_RATIO, &c) != S2M_STATUS_OK || fabs(c - 0.25) > 1e-6) {
        return 3;
    }
    if (s2m_pair_esq(pair, 1, S2M_METHOD_RATIO, &esq, &tail) != S2M_STATUS_OK || fabs(esq - 2.0) > 1e-4) {
        return 4;
    }
    if (s2m_pair_esq(pair, 1, 9, &esq, NULL) != S2M_STATUS_INVALID_ARGUMENT) {
        return 5;
    }
    s2m_pair_free(pair);
    s2m_problem_free(problem);
    printf("ok %s\n", s2m_version());
    return 0;
}
