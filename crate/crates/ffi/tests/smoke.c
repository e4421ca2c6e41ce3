#include <math.h>
#include <stdio.h>
#include "bifi.h"

int main(void) {
    BifiPreset *p = NULL;
    if (bifi_preset_new(2, &p) != BIFI_STATUS_OK) return 1;
    size_t dim = 0, hf = 0, lf = 0;
    bifi_preset_shape(p, &dim, &hf, &lf);
    double z[5] = {0.1, -0.2, 0.3, 0.0, 0.5};
    double out[64];
    if (bifi_solve_hf(p, z, dim, out, 64) != BIFI_STATUS_OK) return 2;
    double mass = 0.0;
    for (size_t i = 0; i < hf; i++) mass += out[i] / (double)hf;
    if (bifi_solve_lf(p, z, dim, out, 2) != BIFI_STATUS_BUFFER_TOO_SMALL) return 3;
    if (bifi_last_error_message() == NULL) return 4;
    bifi_preset_free(p);
    printf("%zu %zu %zu %.12f\n", dim, hf, lf, mass);
    return isfinite(mass) ? 0 : 5;
}
