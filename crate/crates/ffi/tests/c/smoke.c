#include <math.h>
#include <stdio.h>
#include <string.h>

#include "qtraj.h"

#define CHECK(call)                                                              \
    do {                                                                         \
        QtrajStatus s_ = (call);                                                 \
        if (s_ != QTRAJ_STATUS_OK) {                                             \
            fprintf(stderr, "%s failed: %d %s\n", #call, s_, qtraj_last_error()); \
            return 1;                                                            \
        }                                                                        \
    } while (0)

int main(void) {
    const char *dep =
        "{\"dim\":2,\"kraus\":["
        "[[[0.7071067811865476,0],[0,0]],[[0,0],[0.7071067811865476,0]]],"
        "[[[0.5,0],[0,0]],[[0,0],[0,0]]],[[[0,0],[0.5,0]],[[0,0],[0,0]]],"
        "[[[0,0],[0,0]],[[0.5,0],[0,0]]],[[[0,0],[0,0]],[[0,0],[0.5,0]]]]}";
    QtrajChannel *ch = NULL;
    CHECK(qtraj_channel_from_json(dep, &ch));
    if (qtraj_channel_dim(ch) != 2 || qtraj_channel_rank(ch) != 5) return 2;

    double x_re[2] = {1.0, 0.0};
    QtrajMeasure *run = NULL;
    CHECK(qtraj_channel_simulate(ch, x_re, NULL, 2, 1000, 10, 1, 7, &run));
    if (qtraj_measure_len(run) != 990) return 3;

    double rho[4] = {2.0 / 3.0, 0.0, 0.0, 1.0 / 3.0};
    QtrajGap *gap = NULL;
    CHECK(qtraj_gap_new(rho, NULL, 2, &gap));
    double dens = 0.0;
    CHECK(qtraj_gap_density(gap, x_re, NULL, 2, &dens));
    if (fabs(dens - 8.0 / 3.0) > 1e-12) return 4;

    QtrajMeasure *sample = NULL;
    CHECK(qtraj_gap_sample(gap, 500, 3, &sample));
    double w1 = -1.0;
    CHECK(qtraj_wasserstein1(sample, sample, 0, 0, &w1));
    if (w1 != 0.0) return 5;

    QtrajStatus s = qtraj_gap_density(gap, x_re, NULL, 3, &dens);
    if (s != QTRAJ_STATUS_DIMENSION_MISMATCH || strlen(qtraj_last_error()) == 0) return 6;

    char *report = NULL;
    CHECK(qtraj_channel_analyze(ch, &report));
    if (strstr(report, "\"primitive\":true") == NULL) return 7;
    qtraj_string_free(report);

    qtraj_measure_free(sample);
    qtraj_measure_free(run);
    qtraj_gap_free(gap);
    qtraj_channel_free(ch);
    qtraj_channel_free(NULL);
    printf("ok %s\n", qtraj_version());
    return 0;
}
