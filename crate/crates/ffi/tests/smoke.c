#include <stdio.h>
#include <string.h>

#include "mots.h"

#define CHECK(expr)                                              \
    do {                                                         \
        if (!(expr)) {                                           \
            fprintf(stderr, "check failed: %s\n", #expr);        \
            return 1;                                            \
        }                                                        \
    } while (0)

int main(void) {
    MotsTracker *tracker = NULL;
    CHECK(mots_tracker_new(0.5, 2, &tracker) == MOTS_STATUS_OK);
    double vectors[2 * MOTS_IDENTITY_DIM] = {0};
    vectors[0] = 1.0;
    vectors[MOTS_IDENTITY_DIM + 1] = 1.0;
    uint32_t classes[2] = {1, 2};
    uint32_t ids[2] = {0, 0};
    CHECK(mots_tracker_step(tracker, 0, vectors, classes, 2, ids) == MOTS_STATUS_OK);
    CHECK(ids[0] == 1 && ids[1] == 2);
    CHECK(mots_tracker_step(tracker, 0, vectors, classes, 2, ids) == MOTS_STATUS_FRAME_ORDER);
    char msg[256];
    CHECK(mots_last_error(msg, sizeof msg, NULL) == MOTS_STATUS_OK);
    CHECK(strlen(msg) > 0);
    mots_tracker_free(tracker);

    uint8_t pixels[4] = {1, 1, 1, 1};
    MotsMask *mask = NULL;
    CHECK(mots_mask_from_pixels(pixels, 2, 2, &mask) == MOTS_STATUS_OK);
    char rle[16];
    CHECK(mots_mask_to_rle(mask, rle, sizeof rle, NULL) == MOTS_STATUS_OK);
    CHECK(strcmp(rle, "04") == 0);
    mots_mask_free(mask);

    MotsCostModel model = {100.0, 5.0, 1.0, 1.0, 1.0, 1.0, 20.0, 8, 8};
    double ratio = 0.0;
    CHECK(mots_cost_ratio(&model, &ratio) == MOTS_STATUS_OK);
    CHECK(ratio > 0.538 && ratio < 0.539);
    printf("ok\n");
    return 0;
}
