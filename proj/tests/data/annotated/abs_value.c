#include <limits.h>

/*@ requires x > INT_MIN;
    assigns \nothing;
    behavior pos:
      assumes x >= 0;
      ensures \result == x;
    behavior neg:
      assumes x < 0;
      ensures \result == -x;
    complete behaviors;
    disjoint behaviors;
*/
int abs_value(int x) {
  if (x >= 0)
    return x;
  return -x;
}

int main(void) {
  int a = abs_value(-5);
  return 0;
}
