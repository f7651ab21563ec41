#include <stdio.h>
#include <string.h>

#include "depsmell.h"

#define CHECK(cond)                                                        \
    do {                                                                   \
        if (!(cond)) {                                                     \
            const char *e = ds_last_error();                               \
            fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond,         \
                    e ? e : "no error");                                   \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(int argc, char **argv) {
    if (argc != 2) {
        fprintf(stderr, "usage: smoke SNAPSHOT_DIR\n");
        return 2;
    }
    bool ok = false;
    CHECK(ds_semver_satisfies("1.2.5", "~1.2.3", false, &ok) == DS_STATUS_OK && ok);
    CHECK(ds_semver_satisfies("1.3.0", "~1.2.3", false, &ok) == DS_STATUS_OK && !ok);
    CHECK(ds_semver_satisfies("not a version", "*", false, &ok) == DS_STATUS_PARSE);
    CHECK(ds_last_error() != NULL);

    DsStrategy s;
    CHECK(ds_classify_constraint("^0.2.3", &s) == DS_STATUS_OK && s == DS_STRATEGY_PERMISSIVE);

    char path[3][1024];
    const char *names[3] = {"releases.jsonl", "deps.jsonl", "advisories.jsonl"};
    for (int i = 0; i < 3; i++) {
        snprintf(path[i], sizeof path[i], "%s/%s", argv[1], names[i]);
    }
    DsSnapshot *snap = NULL;
    CHECK(ds_snapshot_load(path[0], path[1], path[2], &snap) == DS_STATUS_OK);
    size_t n = 0;
    CHECK(ds_snapshot_advisory_count(snap, &n) == DS_STATUS_OK && n == 3);

    char *json = NULL;
    CHECK(ds_snapshot_timeline_json(snap, "ADV-crit", &json) == DS_STATUS_OK);
    CHECK(strstr(json, "\"app-c\"") != NULL);
    ds_string_free(json);
    CHECK(ds_snapshot_timeline_json(snap, "missing", &json) == DS_STATUS_NOT_FOUND);
    ds_snapshot_free(snap);

    printf("depsmell %s ok\n", ds_version());
    return 0;
}
