from django.db import models


class Run(models.Model):
    """
    One invocation of a management command and where its artifacts went.
    """

    STATUS_RUNNING = 'running'
    STATUS_SUCCEEDED = 'succeeded'
    STATUS_FAILED = 'failed'
    STATUS_CHOICES = (
        (STATUS_RUNNING, 'Running'),
        (STATUS_SUCCEEDED, 'Succeeded'),
        (STATUS_FAILED, 'Failed'),
    )

    command = models.CharField(max_length=20)
    run_dir = models.CharField(max_length=500)
    config_hash = models.CharField(
        max_length=64,
        blank=True)
    seed = models.IntegerField(
        null=True,
        blank=True)
    status = models.CharField(
        max_length=10,
        choices=STATUS_CHOICES,
        default=STATUS_RUNNING)
    exit_code = models.IntegerField(
        null=True,
        blank=True)
    message = models.TextField(blank=True)
    started = models.DateTimeField()
    finished = models.DateTimeField(
        null=True,
        blank=True)

    class Meta:
        ordering = ('-started',)

    def __str__(self):
        return '{} {}'.format(self.command, self.run_dir)
