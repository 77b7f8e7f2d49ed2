/* Compiles the public header as C and makes a round trip through the API. */
#include <stdio.h>

#include "leadtime/leadtime.h"

int main(void) {
  double p[LTL_SUPPORT_SIZE] = {0}, q[LTL_SUPPORT_SIZE] = {0}, w = 0;
  p[0] = 1.0;
  q[3] = 1.0;
  if (ltl_wasserstein1(p, q, &w) != LTL_OK || w != 3.0) {
    fprintf(stderr, "unexpected distance %g\n", w);
    return 1;
  }
  return 0;
}
