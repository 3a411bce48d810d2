/* Compiled as C: the header must stand on its own outside C++. */
#include <stdio.h>
#include <string.h>

#include "clamp/clamp.h"

int main(void) {
  clamp_grammar* g = NULL;
  clamp_state* s0 = NULL;
  clamp_state* s = NULL;
  size_t at = 0;
  int ok = 1;
  if (clamp_grammar_parse("S -> \"a\" S \"b\" | \"\"\n", &g) != CLAMP_OK) return 1;
  if (clamp_state_new(g, &s0) != CLAMP_OK) return 1;
  ok = ok && clamp_state_advance(s0, "aabb", 4, &s, NULL) == CLAMP_OK && clamp_state_is_complete(s);
  clamp_state_free(s);
  s = NULL;
  ok = ok && clamp_state_advance(s0, "abb", 3, &s, &at) == CLAMP_ERR_REJECTED && at == 2 && s == NULL;
  ok = ok && strcmp(clamp_status_name(CLAMP_ERR_REJECTED), "rejected") == 0;
  clamp_state_free(s0);
  clamp_grammar_free(g);
  printf("%s\n", ok ? "ok" : "failed");
  return ok ? 0 : 1;
}
