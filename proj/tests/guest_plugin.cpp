// A loadable embedded guest for tests: registers the reference C-contract
// agent. The bl_* symbols resolve against the host executable.
#include "bridgelab/embedded.hpp"

extern "C" __attribute__((visibility("default"))) int bl_guest_init(void) {
  return bl_register_guest(&bridgelab::reference_embedded_select_move, nullptr);
}
