#include <math.h>
#include <stdio.h>
#include <string.h>

#include "tubelog.h"

int main(void) {
    TlForm *form = NULL;
    if (tl_form_parse("random:4", 2, 1e-9, &form) != TL_STATUS_OK) {
        fprintf(stderr, "parse: %s\n", tl_last_error());
        return 1;
    }
    TlBlueprint *bp = NULL;
    if (tl_blueprint_build(form, 10000, &bp) != TL_STATUS_OK) {
        fprintf(stderr, "build: %s\n", tl_last_error());
        return 1;
    }
    double sx = 0.0, sy = 0.0;
    for (size_t i = 0; i < tl_blueprint_side_count(bp); i++) {
        double re, im;
        tl_blueprint_side(bp, i, &re, &im);
        sx += re;
        sy += im;
    }
    char *json = NULL;
    tl_blueprint_json(bp, &json);
    int ok = tl_blueprint_side_count(bp) == 6 && hypot(sx, sy) < 1e-8 && json && strstr(json, "\"hexagon\"");
    printf("sides=%zu case=%d ok=%d\n", tl_blueprint_side_count(bp), tl_blueprint_hexagon_case(bp), ok);
    tl_string_free(json);
    tl_blueprint_free(bp);
    tl_form_free(form);

    if (tl_form_parse("2/(z*(z-1)*(z+1))", 0, 1e-9, &form) != TL_STATUS_OK) return 1;
    TlStatus s = tl_blueprint_build(form, 0, &bp);
    tl_form_free(form);
    return ok && s == TL_STATUS_NON_GENERIC ? 0 : 1;
}
