#include <stdio.h>
#include <string.h>

#include "lpi.h"

int main(void) {
    const char *src = "int i = 0; while (i < 100) { i++; } assert(i == 100);";
    LpiOptions *opts = lpi_options_new();
    if (lpi_options_set_domain(opts, LPI_DOMAIN_OCTAGONS) != LPI_STATUS_OK) return 1;
    LpiAnalysis *a = NULL;
    if (lpi_analyze(src, opts, &a) != LPI_STATUS_OK) {
        fprintf(stderr, "analyze: %s\n", lpi_last_error());
        return 2;
    }
    if (!lpi_analysis_all_proved(a) || lpi_analysis_assertion_count(a) != 1) return 3;
    char *json = lpi_analysis_json(a);
    if (json == NULL || strstr(json, "\"proved\"") == NULL) return 4;
    lpi_string_free(json);
    lpi_analysis_free(a);

    if (lpi_analyze("int x = ;", opts, &a) != LPI_STATUS_PARSE_ERROR || a != NULL) return 5;
    if (strstr(lpi_last_error(), "expected") == NULL) return 6;
    lpi_options_free(opts);
    printf("ok %s\n", lpi_version());
    return 0;
}
