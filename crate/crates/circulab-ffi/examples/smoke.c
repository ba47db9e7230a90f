#include <stdio.h>
#include <math.h>
#include "circulab.h"

int main(void) {
    if (fabs(clb_u_circ(0.0, 0.0) - 0.5) > 1e-15) return 1;

    ClbSample *s = NULL;
    if (clb_sample_new(50, 50, 0.1, CLB_XI_RADEMACHER, 7, &s) != CLB_OK) return 2;
    size_t nnz = 0;
    if (clb_sample_nnz(s, &nnz) != CLB_OK || nnz == 0) return 3;

    ClbProcessSummary ps;
    if (clb_process_run(s, 50, 0.2, 1.0, 0.0, 1.0, &ps) != CLB_OK) return 4;
    if (!ps.chain_holds) return 5;

    ClbEventCheck evs[6];
    size_t written = 0;
    if (clb_certificates(s, 100, 1.0, 7, evs, 6, &written) != CLB_OK || written == 0) return 6;
    clb_sample_free(s);

    ClbPotential pot;
    if (clb_potential(60, 6.0, 0.1, 1.5, 0.0, CLB_XI_RADEMACHER, 3, &pot) != CLB_OK) return 7;

    /* error path: p out of range must fail with a retrievable message */
    ClbSample *bad = NULL;
    if (clb_sample_new(10, 10, 0.9, CLB_XI_RADEMACHER, 1, &bad) != CLB_ERR_CONTRACT) return 8;
    char msg[256];
    if (clb_last_error(msg, sizeof msg) == 0) return 9;

    printf("ffi smoke ok: nnz=%zu grounded=%d t1=%.4f version=%s err=\"%s\"\n",
           nnz, ps.grounded, pot.t1, clb_version(), msg);
    return 0;
}
