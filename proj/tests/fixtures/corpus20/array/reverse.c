#include <stdio.h>

void reverse(int *a, int n) {
  int i = 0, j = n - 1;
  while (i < j) {
    int t = a[i];
    a[i] = a[j];
    a[j] = t;
    i++;
    j--;
  }
}

int main(void) {
  int a[6] = {1, 2, 3, 4, 5, 6};
  reverse(a, 6);
  for (int k = 0; k < 6; k++) printf("%d", a[k]);
  printf("\n");
  return 0;
}
