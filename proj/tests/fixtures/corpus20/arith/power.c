#include <stdio.h>

long ipow(long base, int exp) {
  long result = 1;
  while (exp > 0) {
    if (exp & 1)
      result *= base;
    base *= base;
    exp >>= 1;
  }
  return result;
}

int main(void) {
  long s = 0;
  for (int e = 0; e < 10; e++) s += ipow(3, e);
  printf("%ld\n", s);
  return 0;
}
