/* SPDX-License-Identifier: Apache-2.0 */
/* Compiled as C: the public header must stand alone without C++. */
#include "netrecon/netrecon.h"

int c_default_restarts(void) {
  nr_em_config cfg;
  nr_em_config_default(&cfg);
  return (int)cfg.restarts;
}
