#include <stdio.h>
#include <string.h>
#include "regint.h"

static int check(const char *src, RegintEngine engine, const char *want) {
    RegintExpr *e = NULL;
    RegintValue *v = NULL;
    if (regint_expr_parse(src, 0, &e) != REGINT_STATUS_OK) return 1;
    if (regint_reg(e, engine, &v) != REGINT_STATUS_OK) return 2;
    char *s = regint_value_render(v);
    int bad = strcmp(s, want) != 0;
    if (bad) fprintf(stderr, "%s: got %s\n", src, s);
    regint_string_free(s);
    regint_value_free(v);
    regint_expr_free(e);
    return bad ? 3 : 0;
}

int main(void) {
    int rc = check("wp(1,2)", REGINT_ENGINE_HAE, "I^2*E2/12 - Y");
    if (rc) return rc;
    rc = check("wp(1,2)*wp(1,3)*wp(2,3)", REGINT_ENGINE_FORESTS,
               "I^6*E2*E4/576 - I^6*E6/864 - I^4*E4*Y/48");
    if (rc) return rc;
    RegintExpr *e = NULL;
    if (regint_expr_parse("wp(1,", 0, &e) != REGINT_STATUS_SYNTAX) return 4;
    if (regint_last_error() == NULL) return 5;
    printf("ok %s\n", regint_version());
    return 0;
}
